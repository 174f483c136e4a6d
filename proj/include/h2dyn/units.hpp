#pragma once

#include <numbers>

// Atomic units throughout (hbar = m_e = e = 1). Laboratory units appear only
// at the configuration boundary.
namespace h2dyn::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double au_time_per_fs = 41.341374;
inline constexpr double au_time_per_as = au_time_per_fs * 1e-3;
inline constexpr double fs_per_au_time = 1.0 / au_time_per_fs;

inline constexpr double speed_of_light = 137.035999084;  // a.u.
inline constexpr double bohr_nm = 0.0529177210903;
inline constexpr double intensity_au_Wcm2 = 3.50945e16;

inline constexpr double hartree_eV = 27.2114;

inline constexpr double proton_mass = 1836.15267343;  // m_e
inline constexpr double nuclear_reduced_mass = 918.0764;  // m_p / 2

}  // namespace h2dyn::units

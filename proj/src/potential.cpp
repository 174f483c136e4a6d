#include "h2dyn/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "h2dyn/digest.hpp"
#include "h2dyn/error.hpp"

namespace h2dyn {

double electron_nuclear(double R, double z, double beta) {
  const double b2 = beta * beta;
  const double a = z + 0.5 * R, b = z - 0.5 * R;
  return -1.0 / std::sqrt(a * a + b2) - 1.0 / std::sqrt(b * b + b2);
}

double soft_coulomb(double R, double z1, double z2, double alpha, double beta) {
  if (!(R > 0.0)) throw DomainError("soft_coulomb: R must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw DomainError("soft_coulomb: softening lengths must be positive");
  const double d = z2 - z1;
  // Electron terms summed first so that swapping z1 and z2 is exact.
  const double wells = electron_nuclear(R, z1, beta) + electron_nuclear(R, z2, beta);
  return 1.0 / R + 1.0 / std::sqrt(d * d + alpha * alpha) + wells;
}

// ---------------------------------------------------------------------------
// CubicSpline

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n == 0 || n != y_.size()) throw ConfigError("spline: knot and value counts differ");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw ConfigError("spline: knots must be strictly ascending");
  m_.assign(n, 0.0);
  if (n < 3) return;
  // Tridiagonal solve for natural end conditions.
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
    const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
    c[i] = h1 / diag;
    d[i] = (rhs - h0 * d[i - 1]) / diag;
  }
  for (std::size_t i = n - 1; i-- > 1;) m_[i] = d[i] - c[i] * m_[i + 1];
}

std::size_t CubicSpline::interval(double x) const {
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) return 0;
  return std::min(i - 1, x_.size() - 2);
}

double CubicSpline::operator()(double x) const {
  if (x_.size() == 1) return y_[0];
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double x) const {
  if (x_.size() == 1 || x <= x_.front() || x >= x_.back()) return 0.0;
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h +
         ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

// ---------------------------------------------------------------------------
// SofteningTable

SofteningTable::SofteningTable(std::vector<double> knots, std::vector<double> alpha,
                               std::vector<double> beta)
    : alpha_(knots, std::move(alpha)), beta_(std::move(knots), std::move(beta)) {
  const auto& k = alpha_.x();
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(alpha_.y()[i] > 0.0) || !(beta_.y()[i] > 0.0))
      throw DomainError("softening values must be positive at every knot");
    if (i + 1 == k.size()) break;
    for (int s = 1; s < 16; ++s) {
      const double r = k[i] + (k[i + 1] - k[i]) * s / 16.0;
      if (!(alpha_(r) > 0.0) || !(beta_(r) > 0.0))
        throw DomainError("softening interpolant drops below zero near R=" + std::to_string(r));
    }
  }
}

SofteningTable SofteningTable::constant(double alpha, double beta) {
  return SofteningTable({1.0}, {alpha}, {beta});
}

void write_softening_table(const std::filesystem::path& path, const SofteningTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write softening table " + path.string());
  for (const auto& line : table.metadata) out << "# " << line << '\n';
  out << "# columns: R_bohr alpha_bohr beta_bohr\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < table.knots().size(); ++i)
    out << table.knots()[i] << ' ' << table.alpha_values()[i] << ' ' << table.beta_values()[i]
        << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Digest softening_digest(const SofteningTable& table) {
  std::ostringstream ss;
  ss << std::setprecision(17);
  for (std::size_t i = 0; i < table.knots().size(); ++i)
    ss << table.knots()[i] << ' ' << table.alpha_values()[i] << ' ' << table.beta_values()[i] << '\n';
  return sha256(ss.str());
}

SofteningTable read_softening_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open softening table " + path.string());
  std::vector<double> r, a, b;
  std::vector<std::string> meta;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      if (body.rfind("columns:", 0) != 0) meta.push_back(body);
      continue;
    }
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected R alpha beta");
    r.push_back(x);
    a.push_back(y);
    b.push_back(z);
  }
  if (r.empty()) throw IoError("softening table " + path.string() + " has no rows");
  SofteningTable t(std::move(r), std::move(a), std::move(b));
  t.metadata = std::move(meta);
  return t;
}

// ---------------------------------------------------------------------------
// ReferenceCurve

ReferenceCurve ReferenceCurve::from_samples(std::vector<double> R, std::vector<double> energy,
                                            CurveLabel label) {
  if (R.size() < 4 || R.size() != energy.size())
    throw IoError("reference curve needs at least 4 (R, E) samples");
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (!std::isfinite(R[i]) || !std::isfinite(energy[i]))
      throw IoError("reference curve has non-finite samples");
    if (i > 0 && !(R[i] > R[i - 1])) throw IoError("reference curve R samples must be strictly ascending");
  }
  if (label == CurveLabel::H2) {
    // A bound curve falls to one minimum and rises towards the dissociation limit.
    int minima = 0;
    for (std::size_t i = 1; i + 1 < energy.size(); ++i)
      if (energy[i] < energy[i - 1] && energy[i] <= energy[i + 1]) ++minima;
    if (minima != 1) throw IoError("H2 reference curve must have a single minimum");
  }
  ReferenceCurve c;
  c.R = std::move(R);
  c.energy = std::move(energy);
  c.label = label;
  c.spline = CubicSpline(c.R, c.energy);
  return c;
}

double ReferenceCurve::at(double r) const {
  if (r < R.front() || r > R.back())
    throw DomainError("reference curve does not cover R=" + std::to_string(r));
  return spline(r);
}

ReferenceCurve parse_reference_curve(const std::string& text, CurveLabel label) {
  std::vector<double> rs, es;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double r, e;
    if (!(ls >> r >> e) || !std::isfinite(r) || !std::isfinite(e))
      throw IoError("reference curve line " + std::to_string(lineno) + ": expected 'R E'");
    if (!rs.empty() && !(r > rs.back()))
      throw IoError("reference curve line " + std::to_string(lineno) +
                    ": R samples must be strictly ascending");
    rs.push_back(r);
    es.push_back(e);
  }
  return ReferenceCurve::from_samples(std::move(rs), std::move(es), label);
}

ReferenceCurve read_reference_curve(const std::filesystem::path& path, CurveLabel label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open reference curve " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto c = parse_reference_curve(ss.str(), label);
  c.digest = sha256_hex(ss.str());
  return c;
}

// ---------------------------------------------------------------------------
// PotentialGrid

PotentialGrid eval_potential_grid(std::shared_ptr<const GridSpec> spec,
                                  const SofteningTable& table) {
  PotentialGrid out{spec, RealBuffer(spec->size())};
  const auto& g = *spec;
  for (int iR = 0; iR < g.nR; ++iR) {
    const double R = g.R_points[iR];
    const double alpha = table.alpha(R), beta = table.beta(R);
    for (int i1 = 0; i1 < g.nz; ++i1)
      for (int i2 = 0; i2 < g.nz; ++i2)
        out.values[g.index(iR, i1, i2)] =
            soft_coulomb(R, g.z_points[i1], g.z_points[i2], alpha, beta);
  }
  return out;
}

PotentialGrid eval_potential_grid(const GridSpec& spec, const SofteningTable& table) {
  return eval_potential_grid(std::make_shared<const GridSpec>(spec), table);
}

// ---------------------------------------------------------------------------
// Reduced eigensolvers

namespace {

std::vector<double> reduced_z(const ReducedSolverConfig& cfg) {
  if (cfg.nz < 8 || !is_power_of_two(cfg.nz))
    throw ConfigError("reduced solver nz must be a power of two >= 8");
  if (!(cfg.z_max > 0.0)) throw ConfigError("reduced solver z_max must be positive");
  std::vector<double> z(cfg.nz);
  const double dz = 2.0 * cfg.z_max / cfg.nz;
  for (int i = 0; i < cfg.nz; ++i) z[i] = -cfg.z_max + i * dz;
  return z;
}

double gaussian(double x, double c, double w) { return std::exp(-(x - c) * (x - c) / (2 * w * w)); }

}  // namespace

SpectralBox line_box(const ReducedSolverConfig& cfg) {
  return SpectralBox{{cfg.nz}, {2.0 * cfg.z_max / cfg.nz}, {1.0}};
}

SpectralBox plane_box(const ReducedSolverConfig& cfg) {
  const double dz = 2.0 * cfg.z_max / cfg.nz;
  return SpectralBox{{cfg.nz, cfg.nz}, {dz, dz}, {1.0, 1.0}};
}

std::vector<double> h2plus_potential_line(double R, double beta, const ReducedSolverConfig& cfg) {
  if (!(R > 0.0) || !(beta > 0.0)) throw DomainError("h2plus potential: R and beta must be positive");
  const auto z = reduced_z(cfg);
  std::vector<double> v(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = 1.0 / R + electron_nuclear(R, z[i], beta);
  return v;
}

std::vector<double> h2_potential_plane(double R, double alpha, double beta,
                                       const ReducedSolverConfig& cfg) {
  const auto z = reduced_z(cfg);
  const std::size_t n = z.size();
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = soft_coulomb(R, z[i], z[j], alpha, beta);
  return v;
}

double h2plus_energy(double R, double beta, const ReducedSolverConfig& cfg, ComplexBuffer* warm) {
  const auto v = h2plus_potential_line(R, beta, cfg);
  const auto z = reduced_z(cfg);
  ComplexBuffer local;
  ComplexBuffer& psi = warm != nullptr ? *warm : local;
  if (psi.size() != z.size()) {
    psi.assign(z.size(), cplx{});
    for (std::size_t i = 0; i < z.size(); ++i)
      psi[i] = gaussian(z[i], 0.5 * R, 1.0) + gaussian(z[i], -0.5 * R, 1.0);
  }
  const int n = cfg.nz;
  auto res = relax_in_box(line_box(cfg), v, psi, cfg.itime,
                          [n](std::span<cplx> p) { project_parity_line(p, n); });
  return res.energy;
}

double h2_energy(double R, double alpha, double beta, const ReducedSolverConfig& cfg,
                 ComplexBuffer* warm) {
  const auto v = h2_potential_plane(R, alpha, beta, cfg);
  const auto z = reduced_z(cfg);
  const std::size_t n = z.size();
  ComplexBuffer local;
  ComplexBuffer& psi = warm != nullptr ? *warm : local;
  if (psi.size() != n * n) {
    psi.assign(n * n, cplx{});
    const double h = 0.5 * R;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        psi[i * n + j] = gaussian(z[i], h, 1.0) * gaussian(z[j], -h, 1.0) +
                         gaussian(z[i], -h, 1.0) * gaussian(z[j], h, 1.0);
  }
  const int nz = cfg.nz;
  auto res = relax_in_box(plane_box(cfg), v, psi, cfg.itime,
                          [nz](std::span<cplx> p) { project_exchange_parity(p, nz); });
  return res.energy;
}

}  // namespace h2dyn

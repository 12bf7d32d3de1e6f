#include "edc/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace edc {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
  auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_double(double v, std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return fnv1a(buf, std::strlen(buf), h);
}

}  // namespace

void SystemParams::validate() const {
  if (kappa < 0 || kappa_e < 0 || kappa_f < 0 || kappa_b < 0 || dephasing < 0)
    throw ConfigError("SystemParams: rates must be >= 0");
  if (E_c <= 0) throw ConfigError("SystemParams: E_c must be > 0");
}

SystemParams SystemParams::paper() {
  SystemParams p;
  p.chi_e = kTwoPi * 1e6;
  p.chi_f = 2.0 * p.chi_e;
  p.E_c = kTwoPi * 400e6;
  p.kappa = 1.0 / 2e-3;
  p.kappa_e = 1.0 / 40e-6;
  p.kappa_f = 1.0 / 20e-6;
  return p;
}

SystemParams SystemParams::paper_two_mode() {
  SystemParams p = paper();
  p.chi_e_b = p.chi_e;
  p.chi_f_b = p.chi_f;
  p.kappa_b = p.kappa;
  return p;
}

std::uint64_t SystemParams::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (double v : {chi_e, chi_f, E_c, kappa, kappa_e, kappa_f, chi_e_b, chi_f_b,
                   kappa_b, dephasing})
    h = fnv1a_double(v, h);
  int c = static_cast<int>(control);
  h = fnv1a(&c, sizeof(c), h);
  return h;
}

std::vector<std::string> channel_names(bool two_mode) {
  std::vector<std::string> n = {"omega_x", "omega_y", "omega_rx", "omega_ry"};
  if (two_mode) {
    n.push_back("omega_rx2");
    n.push_back("omega_ry2");
  }
  return n;
}

void ControlPulse::validate(double amp_max) const {
  if (dt <= 0) throw ConfigError("ControlPulse: dt must be > 0");
  if (channels.empty()) throw ConfigError("ControlPulse: empty channel list");
  if (names.size() != channels.size())
    throw ConfigError("ControlPulse: channel name/array count mismatch");
  const std::size_t n = channels[0].size();
  if (n == 0) throw ConfigError("ControlPulse: zero segments");
  for (auto& c : channels)
    if (c.size() != n) throw ConfigError("ControlPulse: channel length mismatch");
  if (amp_max > 0) {
    for (auto& c : channels)
      for (double v : c)
        if (std::abs(v) > amp_max * (1.0 + 1e-12))
          throw ConfigError("ControlPulse: amplitude exceeds bound");
  }
}

ControlPulse ControlPulse::zeros(bool two_mode, double dt, int segments) {
  ControlPulse p;
  p.dt = dt;
  p.names = channel_names(two_mode);
  p.channels.assign(p.names.size(), std::vector<double>(segments, 0.0));
  return p;
}

ControlPulse ControlPulse::idle(double duration, double dt) {
  int n = std::max(1, static_cast<int>(std::ceil(duration / dt - 1e-9)));
  ControlPulse p = zeros(false, duration / n, n);
  return p;
}

OperatorMatrix ancilla_drive_hamiltonian(const SystemParams& p, double omega_x,
                                         double omega_y) {
  p.validate();
  const double cx = std::sqrt(2.0) * (omega_y * omega_y - omega_x * omega_x) / (2.0 * p.E_c);
  const double cy = -std::sqrt(2.0) * omega_x * omega_y / p.E_c;
  OperatorMatrix sx = sigma_gf_x(), sy = sigma_gf_y();
  return {cx * sx.m + cy * sy.m, sx.label};
}

HamiltonianGenerator::HamiltonianGenerator(const SystemParams& p,
                                           const HilbertDims& dims)
    : params_(p), dims_(dims) {
  p.validate();
  const SpaceLabel full = dims.full_label();
  const int d = full.dim();
  auto proj = ancilla_projectors();
  const Matrix pe = embed(proj[kE], full).m;
  const Matrix pf = embed(proj[kF], full).m;

  drift_ = Matrix::Zero(d, d);
  std::vector<Matrix> cavity_x, cavity_y;
  if (dims.cavity_dim > 0) {
    OperatorMatrix a = annihilation(dims, Factor::CavityA);
    Matrix af = embed(a, full).m;
    Matrix num = af.adjoint() * af;
    drift_ += -p.chi_e * num * pe - p.chi_f * num * pf;
    cavity_x.push_back(0.5 * (af.adjoint() + af));
    cavity_y.push_back(Cx(0, 1) * 0.5 * (af.adjoint() - af));
  }
  if (dims.two_mode_problem()) {
    OperatorMatrix b = annihilation(dims, Factor::CavityB);
    Matrix bf = embed(b, full).m;
    Matrix num = bf.adjoint() * bf;
    drift_ += -p.chi_e_b * num * pe - p.chi_f_b * num * pf;
    cavity_x.push_back(0.5 * (bf.adjoint() + bf));
    cavity_y.push_back(Cx(0, 1) * 0.5 * (bf.adjoint() - bf));
  }

  if (p.control == AncillaControl::DirectGE) {
    sx_ = embed(sigma_ge_x(), full).m;
    sy_ = embed(sigma_ge_y(), full).m;
  } else {
    sx_ = embed(sigma_gf_x(), full).m;
    sy_ = embed(sigma_gf_y(), full).m;
  }

  // Channel order: omega_x, omega_y (ancilla), then per-cavity rx, ry. The
  // channel set always includes the first cavity pair so that pulses have a
  // uniform layout; on ancilla-only spaces those channels act as zero.
  d_ops_.push_back(Matrix());  // omega_x, amplitude-dependent
  d_ops_.push_back(Matrix());  // omega_y
  if (cavity_x.empty()) {
    d_ops_.push_back(Matrix::Zero(d, d));
    d_ops_.push_back(Matrix::Zero(d, d));
  }
  for (std::size_t m = 0; m < cavity_x.size(); ++m) {
    d_ops_.push_back(cavity_x[m]);
    d_ops_.push_back(cavity_y[m]);
  }
}

Matrix HamiltonianGenerator::build(std::span<const double> amps) const {
  if (static_cast<int>(amps.size()) != channel_count())
    throw DimensionError("HamiltonianGenerator: channel count mismatch");
  Matrix h = drift_;
  const double ox = amps[kOmegaX], oy = amps[kOmegaY];
  if (params_.control == AncillaControl::TwoPhotonGF) {
    const double cx = std::sqrt(2.0) * (oy * oy - ox * ox) / (2.0 * params_.E_c);
    const double cy = -std::sqrt(2.0) * ox * oy / params_.E_c;
    h += cx * sx_ + cy * sy_;
  } else if (params_.control == AncillaControl::LinearGF) {
    h += ox * sx_ + oy * sy_;
  } else {
    h += 0.5 * ox * sx_ + 0.5 * oy * sy_;
  }
  for (int c = 2; c < channel_count(); ++c) h += amps[c] * d_ops_[c];
  return h;
}

Matrix HamiltonianGenerator::d_amp(std::span<const double> amps, int channel) const {
  if (channel < 0 || channel >= channel_count())
    throw DimensionError("HamiltonianGenerator: bad channel index");
  const double ox = amps[kOmegaX], oy = amps[kOmegaY];
  const double s2 = std::sqrt(2.0);
  if (channel == kOmegaX) {
    if (params_.control == AncillaControl::TwoPhotonGF)
      return (-s2 * ox / params_.E_c) * sx_ + (-s2 * oy / params_.E_c) * sy_;
    return params_.control == AncillaControl::LinearGF ? Matrix(sx_) : Matrix(0.5 * sx_);
  }
  if (channel == kOmegaY) {
    if (params_.control == AncillaControl::TwoPhotonGF)
      return (s2 * oy / params_.E_c) * sx_ + (-s2 * ox / params_.E_c) * sy_;
    return params_.control == AncillaControl::LinearGF ? Matrix(sy_) : Matrix(0.5 * sy_);
  }
  return d_ops_[channel];
}

OperatorMatrix composite_hamiltonian(const SystemParams& p, const HilbertDims& dims,
                                     std::span<const double> amps) {
  HamiltonianGenerator gen(p, dims);
  return {gen.build(amps), dims.full_label()};
}

CollapseSet default_collapse_set(const SystemParams& p, const HilbertDims& dims) {
  p.validate();
  const SpaceLabel full = dims.full_label();
  CollapseSet set;
  if (p.kappa > 0 && dims.cavity_dim > 0)
    set.ops.push_back({embed(annihilation(dims, Factor::CavityA), full), p.kappa});
  if (p.kappa_b > 0 && dims.two_mode_problem())
    set.ops.push_back({embed(annihilation(dims, Factor::CavityB), full), p.kappa_b});
  if (p.kappa_e > 0)
    set.ops.push_back({embed(ancilla_transition(kG, kE), full), p.kappa_e});
  if (p.kappa_f > 0)
    set.ops.push_back({embed(ancilla_transition(kE, kF), full), p.kappa_f});
  if (p.dephasing > 0) {
    auto proj = ancilla_projectors();
    OperatorMatrix z{proj[kG].m - proj[kF].m, proj[kG].label};
    set.ops.push_back({embed(z, full), p.dephasing});
  }
  return set;
}

std::pair<double, double> coupling_from_quadratures(double omega_x, double omega_y,
                                                    double e_c) {
  const double s2 = std::sqrt(2.0);
  return {s2 * (omega_y * omega_y - omega_x * omega_x) / (2.0 * e_c),
          -s2 * omega_x * omega_y / e_c};
}

void quadratures_from_coupling(const std::vector<double>& cx,
                               const std::vector<double>& cy, double e_c,
                               std::vector<double>& omega_x,
                               std::vector<double>& omega_y) {
  // c = -sqrt(2) w^2 / (2 E_c) with w = omega_x + i omega_y, so
  // w = sqrt(-sqrt(2) E_c c); the branch follows the previous segment.
  const std::size_t n = cx.size();
  omega_x.assign(n, 0.0);
  omega_y.assign(n, 0.0);
  Cx prev(0, 0);
  for (std::size_t s = 0; s < n; ++s) {
    const Cx z = -std::sqrt(2.0) * e_c * Cx(cx[s], cy[s]);
    Cx w = std::sqrt(z);
    if (s > 0 && std::abs(w - prev) > std::abs(-w - prev)) w = -w;
    omega_x[s] = w.real();
    omega_y[s] = w.imag();
    prev = w;
  }
}

void write_pulse(const ControlPulse& pulse, const std::string& path,
                 std::uint64_t params_hash) {
  pulse.validate();
  std::ofstream f(path);
  if (!f) throw ParseError("write_pulse: cannot open " + path);
  char buf[64];
  f << "# edctrl pulse v1\n";
  std::snprintf(buf, sizeof(buf), "%.17g", pulse.dt);
  f << "dt_s " << buf << "\n";
  f << "segments " << pulse.segment_count() << "\n";
  f << "params_hash " << params_hash << "\n";
  f << "channels";
  for (auto& n : pulse.names) f << " " << n;
  f << "\n";
  for (int s = 0; s < pulse.segment_count(); ++s) {
    for (std::size_t c = 0; c < pulse.channels.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", pulse.channels[c][s]);
      f << (c ? " " : "") << buf;
    }
    f << "\n";
  }
  if (!f) throw ParseError("write_pulse: write failed for " + path);
}

LoadedPulse read_pulse(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("read_pulse: cannot open " + path);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(f, line))
      throw ParseError("read_pulse: " + path + ": unexpected end of file at line " +
                       std::to_string(lineno + 1));
    ++lineno;
  };
  next_line();
  if (line.rfind("# edctrl pulse", 0) != 0)
    throw ParseError("read_pulse: " + path + ": missing header magic");
  LoadedPulse out;
  next_line();
  {
    std::istringstream is(line);
    std::string key;
    is >> key >> out.pulse.dt;
    if (key != "dt_s" || !is)
      throw ParseError("read_pulse: " + path + ": bad dt_s at line " + std::to_string(lineno));
  }
  int segments = 0;
  next_line();
  {
    std::istringstream is(line);
    std::string key;
    is >> key >> segments;
    if (key != "segments" || !is || segments <= 0)
      throw ParseError("read_pulse: " + path + ": bad segments at line " + std::to_string(lineno));
  }
  next_line();
  {
    std::istringstream is(line);
    std::string key;
    is >> key >> out.params_hash;
    if (key != "params_hash" || !is)
      throw ParseError("read_pulse: " + path + ": bad params_hash at line " + std::to_string(lineno));
  }
  next_line();
  {
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key != "channels")
      throw ParseError("read_pulse: " + path + ": bad channels at line " + std::to_string(lineno));
    std::string name;
    while (is >> name) out.pulse.names.push_back(name);
    if (out.pulse.names.empty())
      throw ParseError("read_pulse: " + path + ": empty channel list at line " +
                       std::to_string(lineno));
  }
  out.pulse.channels.assign(out.pulse.names.size(), std::vector<double>());
  for (auto& c : out.pulse.channels) c.reserve(segments);
  for (int s = 0; s < segments; ++s) {
    next_line();
    std::istringstream is(line);
    for (std::size_t c = 0; c < out.pulse.channels.size(); ++c) {
      double v;
      if (!(is >> v))
        throw ParseError("read_pulse: " + path + ": truncated row at line " +
                         std::to_string(lineno) + ", field " + std::to_string(c + 1));
      out.pulse.channels[c].push_back(v);
    }
  }
  out.pulse.validate();
  return out;
}

}  // namespace edc

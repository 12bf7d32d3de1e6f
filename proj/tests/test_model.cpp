#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "edc/model.hpp"

using namespace edc;

namespace {
constexpr double kTwoPi = 2.0 * kPi;
}

TEST_CASE("ancilla drive hamiltonian follows the two-photon form") {
  SystemParams p = SystemParams::paper();

  OperatorMatrix zero = ancilla_drive_hamiltonian(p, 0, 0);
  CHECK(zero.m.cwiseAbs().maxCoeff() == 0.0);

  const double omega = kTwoPi * 10e6;
  OperatorMatrix hx = ancilla_drive_hamiltonian(p, omega, 0);
  Matrix want = -(std::sqrt(2.0) * omega * omega / (2 * p.E_c)) * sigma_gf_x().m;
  CHECK((hx.m - want).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(hx.m(kE, kE) == Cx(0, 0));  // |e> untouched

  OperatorMatrix hxy = ancilla_drive_hamiltonian(p, omega, omega);
  Matrix want_y = -(std::sqrt(2.0) * omega * omega / p.E_c) * sigma_gf_y().m;
  CHECK((hxy.m - want_y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("drive map is even under joint sign flip") {
  SystemParams p = SystemParams::paper();
  const double ox = kTwoPi * 7e6, oy = kTwoPi * 3e6;
  Matrix a = ancilla_drive_hamiltonian(p, ox, oy).m;
  Matrix b = ancilla_drive_hamiltonian(p, -ox, -oy).m;
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("composite hamiltonian drift") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  std::vector<double> zero(4, 0.0);
  Matrix h = composite_hamiltonian(p, dims, zero).m;
  // diagonal drift; |4>|f> eigenvalue is -4 chi_f
  CHECK(h.cwiseAbs().maxCoeff() > 0);
  Vector v = kron(fock(12, 4), fock(3, kF));
  CHECK(((h * v) - (-4.0 * p.chi_f) * v).norm() < 1e-6 * p.chi_f);
  // off-diagonal free
  Matrix offdiag = h - Matrix(h.diagonal().asDiagonal());
  CHECK(offdiag.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("composite hamiltonian is hermitian for random drives") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> amps(4);
    for (auto& a : amps) a = kTwoPi * 40e6 * uni(rng);
    Matrix h = composite_hamiltonian(p, dims, amps).m;
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("cavity-only drive commutes with ancilla projectors") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  std::vector<double> amps = {0, 0, kTwoPi * 5e6, 0};
  Matrix h = composite_hamiltonian(p, dims, amps).m;
  Matrix drift = composite_hamiltonian(p, dims, std::vector<double>(4, 0.0)).m;
  Matrix drive = h - drift;
  for (auto& proj : ancilla_projectors()) {
    Matrix pf = embed(proj, dims.full_label()).m;
    CHECK((drive * pf - pf * drive).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("drift commutes with photon number and projectors") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  Matrix h = composite_hamiltonian(p, dims, std::vector<double>(4, 0.0)).m;
  Matrix a = embed(annihilation(dims), dims.full_label()).m;
  Matrix num = a.adjoint() * a;
  const double scale = h.cwiseAbs().maxCoeff();
  CHECK((h * num - num * h).cwiseAbs().maxCoeff() < 1e-12 * scale);
  for (auto& proj : ancilla_projectors()) {
    Matrix pf = embed(proj, dims.full_label()).m;
    CHECK((h * pf - pf * h).cwiseAbs().maxCoeff() < 1e-12 * scale);
  }
}

TEST_CASE("hamiltonian is linear in cavity drives and quadratic in ancilla drives") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(8);
  HamiltonianGenerator gen(p, dims);
  const double step = kTwoPi * 4e6;
  // five amplitude points per channel; second differences vanish for linear
  // channels, third differences for the quadratic ones
  for (int ch = 0; ch < 4; ++ch) {
    std::vector<Matrix> h;
    for (int k = 0; k < 5; ++k) {
      std::vector<double> amps = {kTwoPi * 1e6, kTwoPi * 2e6, kTwoPi * 3e6,
                                  kTwoPi * 1e6};
      amps[ch] = k * step;
      h.push_back(gen.build(amps));
    }
    if (ch >= kOmegaRx) {
      Matrix d2 = h[2] - 2 * h[1] + h[0];
      CHECK(d2.cwiseAbs().maxCoeff() < 1e-6);
    } else {
      Matrix d3 = h[3] - 3 * h[2] + 3 * h[1] - h[0];
      CHECK(d3.cwiseAbs().maxCoeff() < 1e-6);
      Matrix d2 = h[2] - 2 * h[1] + h[0];
      CHECK(d2.cwiseAbs().maxCoeff() > 1.0);  // genuinely quadratic
    }
  }
}

TEST_CASE("default collapse set") {
  SystemParams p = SystemParams::paper();
  HilbertDims dims = HilbertDims::single_mode(12);
  CollapseSet set = default_collapse_set(p, dims);
  CHECK(set.size() == 3);
  CHECK(set.ops[0].second == doctest::Approx(1.0 / 2e-3));
  CHECK(set.ops[1].second == doctest::Approx(1.0 / 40e-6));
  CHECK(set.ops[2].second == doctest::Approx(1.0 / 20e-6));

  SystemParams quiet = p;
  quiet.kappa = quiet.kappa_e = quiet.kappa_f = 0;
  CHECK(default_collapse_set(quiet, dims).size() == 0);
}

TEST_CASE("pulse round trip is bit exact") {
  ControlPulse pulse = ControlPulse::zeros(false, 4e-9, 7);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (auto& ch : pulse.channels)
    for (auto& v : ch) v = kTwoPi * 40e6 * uni(rng);

  const std::string path = "tmp_pulse_roundtrip.pulse";
  write_pulse(pulse, path, 12345u);
  LoadedPulse back = read_pulse(path);
  std::remove(path.c_str());

  CHECK(back.params_hash == 12345u);
  CHECK(back.pulse.dt == pulse.dt);
  REQUIRE(back.pulse.channels.size() == pulse.channels.size());
  for (std::size_t c = 0; c < pulse.channels.size(); ++c)
    for (std::size_t s = 0; s < pulse.channels[c].size(); ++s)
      CHECK(back.pulse.channels[c][s] == pulse.channels[c][s]);
}

TEST_CASE("truncated pulse file fails to parse") {
  ControlPulse pulse = ControlPulse::zeros(false, 4e-9, 5);
  const std::string path = "tmp_pulse_truncated.pulse";
  write_pulse(pulse, path, 1u);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(path);
  out << text.substr(0, text.size() / 2);
  out.close();
  CHECK_THROWS_AS(read_pulse(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("pulse validation") {
  ControlPulse empty;
  CHECK_THROWS_AS(empty.validate(), ConfigError);

  ControlPulse pulse = ControlPulse::zeros(false, 4e-9, 3);
  pulse.channels[1].pop_back();
  CHECK_THROWS_AS(pulse.validate(), ConfigError);

  ControlPulse loud = ControlPulse::zeros(false, 4e-9, 3);
  loud.channels[0][0] = 1e12;
  CHECK_THROWS_AS(loud.validate(kTwoPi * 40e6), ConfigError);
}

TEST_CASE("params hash distinguishes parameter sets") {
  SystemParams a = SystemParams::paper();
  SystemParams b = a;
  CHECK(a.hash() == b.hash());
  b.kappa_e *= 2;
  CHECK(a.hash() != b.hash());
  SystemParams c = a;
  c.control = AncillaControl::DirectGE;
  CHECK(a.hash() != c.hash());
}

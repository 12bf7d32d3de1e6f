// Timing comparison of the serial reference paths against the OpenMP kernels:
// batched master-equation propagation, gradient assembly, and the budget
// lifetime sweep. Results are checked for bitwise equality while timing.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "edc/budget.hpp"
#include "edc/grape.hpp"
#include "edc/qec.hpp"

using namespace edc;

namespace {

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

ControlPulse random_pulse(int segments, double scale, std::uint64_t seed) {
  ControlPulse pulse = ControlPulse::zeros(false, 4e-9, segments);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (auto& ch : pulse.channels)
    for (auto& v : ch) v = scale * 2 * kPi * 40e6 * uni(rng);
  return pulse;
}

struct Row {
  const char* name;
  double serial_s;
  double par_s;
  bool identical;
};

void print(const Row& r) {
  std::printf("%-24s serial %8.3f s   openmp %8.3f s   speedup %5.2fx   %s\n",
              r.name, r.serial_s, r.par_s, r.serial_s / r.par_s,
              r.identical ? "bitwise-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads available: %d\n\n", max_threads());

  // 1. batched Lindblad propagation (the channel-builder kernel)
  {
    SystemParams p = SystemParams::paper();
    HilbertDims dims = HilbertDims::single_mode(12);
    HamiltonianGenerator gen(p, dims);
    CollapseSet collapse = default_collapse_set(p, dims);
    ControlPulse pulse = random_pulse(60, 0.2, 1);
    std::vector<Matrix> a, b;
    for (int k = 0; k < 36; ++k) {
      Matrix m = Matrix::Zero(36, 36);
      m(k, k) = 1;
      a.push_back(m);
    }
    b = a;
    const double t0 = now_s();
    propagate_lindblad_batch(a, pulse, gen, collapse, {}, Exec::Serial);
    const double t1 = now_s();
    propagate_lindblad_batch(b, pulse, gen, collapse, {}, Exec::Par);
    const double t2 = now_s();
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      same = same && (a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0;
    print({"lindblad_batch", t1 - t0, t2 - t1, same});
  }

  // 2. gradient assembly over segments
  {
    SystemParams p = SystemParams::paper();
    HilbertDims dims = HilbertDims::single_mode(12);
    BinomialCode code = BinomialCode::standard(12);
    TargetIsometry target = hadamard_target(code, dims);
    ControlPulse pulse = random_pulse(500, 0.1, 2);
    const double t0 = now_s();
    auto gs = gradient(pulse, target, p, Exec::Serial);
    const double t1 = now_s();
    auto gp = gradient(pulse, target, p, Exec::Par);
    const double t2 = now_s();
    bool same = gs == gp;
    print({"grape_gradient", t1 - t0, t2 - t1, same});
  }

  // 3. budget lifetime sweep
  {
    BudgetParams p = BudgetParams::paper();
    std::vector<double> lifetimes;
    for (int i = 0; i < 400; ++i)
      lifetimes.push_back(5.0 * std::pow(400.0, i / 399.0));
    const double t0 = now_s();
    auto a = gain_vs_lifetime(p, lifetimes, {}, Exec::Serial);
    const double t1 = now_s();
    auto b = gain_vs_lifetime(p, lifetimes, {}, Exec::Par);
    const double t2 = now_s();
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i)
      same = same && a[i].ab.gain == b[i].ab.gain && a[i].b.gain == b[i].b.gain;
    print({"budget_sweep", t1 - t0, t2 - t1, same});
  }
  return 0;
}

#include "forge/components.hpp"
#include "forge/field.hpp"
#include "forge/pseudo.hpp"

#include <benchmark/benchmark.h>

using namespace forge;

namespace {

const FieldBasis& five_wire_basis() {
  static const FieldBasis basis = unit_basis(
      TrapLayout::from_component(make_straight_section(40, 60, 50, 60, 10), "s"));
  return basis;
}

void BM_PatchPotential(benchmark::State& state) {
  const Polygon poly = {{-30, -20}, {40, -20}, {40, 25}, {-30, 25}};
  const Vec3 r(3, 7, 40);
  for (auto _ : state) benchmark::DoNotOptimize(patch_potential(poly, r));
}
BENCHMARK(BM_PatchPotential);

void BM_PatchSample(benchmark::State& state) {
  const Polygon poly = {{-30, -20}, {40, -20}, {40, 25}, {-30, 25}};
  const Vec3 r(3, 7, 40);
  double phi;
  Vec3 g;
  Mat3 h;
  for (auto _ : state) {
    patch_sample(poly, r, phi, g, h);
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_PatchSample);

void BM_FiveWireEvaluate(benchmark::State& state) {
  const FieldBasis& basis = five_wire_basis();
  std::vector<double> volts(basis.net_count(), 0.0);
  volts[basis.rf_net_index()] = 113.0;
  volts[2] = -1.3;
  volts[5] = 0.8;
  const Vec3 r(300, -4, 40);
  for (auto _ : state)
    benchmark::DoNotOptimize(basis.evaluate(std::span<const double>(volts), r));
}
BENCHMARK(BM_FiveWireEvaluate);

void BM_Pseudopotential(benchmark::State& state) {
  const FieldBasis& basis = five_wire_basis();
  const RfDrive drive = RfDrive::mg24(113, 90.7e6);
  const Vec3 r(300, -4, 40);
  for (auto _ : state) benchmark::DoNotOptimize(pseudopotential(basis, drive, r));
}
BENCHMARK(BM_Pseudopotential);

}  // namespace

// Microbenchmarks for the hot paths of a training step.

#include <benchmark/benchmark.h>

#include "sflab/cw.hpp"
#include "sflab/inspection.hpp"
#include "sflab/lander.hpp"
#include "sflab/sf_agent.hpp"

using namespace sflab;

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

agent::Batch random_batch(const agent::AgentDims& d, int b, int n_alt, Rng& rng) {
  agent::Batch batch;
  batch.s = gaussian(d.obs_dim, b, rng);
  batch.a = gaussian(d.action_dim, b, rng).array().tanh();
  batch.phi = gaussian(d.feature_dim, b, rng);
  batch.s_next = gaussian(d.obs_dim, b, rng);
  batch.w = Matrix::Constant(d.feature_dim, b, 1.0 / d.feature_dim);
  for (int i = 0; i < n_alt; ++i) batch.alternatives.push_back(batch.w);
  batch.done = Vector::Zero(b);
  return batch;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  Rng rng = make_rng(1);
  nn::Mlp net({16, width, width, 1}, nn::Activation::kNone, "q", rng);
  const Matrix x = gaussian(16, 256, rng);
  const Matrix dy = Matrix::Ones(1, 256);
  for (auto _ : state) {
    nn::MlpTape tape;
    benchmark::DoNotOptimize(net.forward(x, tape));
    benchmark::DoNotOptimize(net.backward(tape, dy));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256);

template <class Critic>
void BM_SfCriticForwardBackward(benchmark::State& state) {
  Rng rng = make_rng(2);
  const agent::SfCriticShape shape{12, 3, 5, static_cast<int>(state.range(0)), 1, 2};
  Critic critic(shape, "psi", rng);
  const Matrix s = gaussian(12, 256, rng), a = gaussian(3, 256, rng), w = Matrix::Constant(5, 256, 0.2);
  const Matrix dpsi = Matrix::Ones(5, 256);
  for (auto _ : state) {
    typename Critic::Tape tape;
    benchmark::DoNotOptimize(critic.forward(s, a, w, tape));
    benchmark::DoNotOptimize(critic.backward(tape, dpsi, true));
  }
  state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(BM_SfCriticForwardBackward<agent::SfaStack>)->Arg(64)->Arg(256);
BENCHMARK(BM_SfCriticForwardBackward<agent::CollapsedSfCritic>)->Arg(64)->Arg(256);

void BM_AgentUpdate(benchmark::State& state) {
  const auto arch = static_cast<agent::Architecture>(state.range(0));
  agent::AgentConfig cfg;
  cfg.architecture = arch;
  cfg.type = agent::AgentType::kGeneralist;
  cfg.hidden_units = 64;
  cfg.encoder_units = 64;
  cfg.n_alternatives = arch == agent::Architecture::kSac ? 0 : 2;
  const agent::AgentDims dims{8, 2, 4};
  Rng rng = make_rng(3);
  auto a = agent::make_agent(cfg, dims, rng);
  const agent::Batch batch = random_batch(dims, 64, cfg.n_alternatives, rng);
  for (auto _ : state) benchmark::DoNotOptimize(a->update(batch, rng));
  state.SetLabel(agent::to_string(arch));
}
BENCHMARK(BM_AgentUpdate)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_LanderStep(benchmark::State& state) {
  env::LanderEnv env;
  Rng rng = make_rng(4);
  env.reset(rng);
  Vector action(2);
  action << 0.3, 0.0;
  for (auto _ : state) {
    const auto r = env.step(action);
    if (r.done()) env.reset(rng);
    benchmark::DoNotOptimize(r.phi);
  }
}
BENCHMARK(BM_LanderStep);

void BM_InspectionStep(benchmark::State& state) {
  env::InspectionEnv env(env::InspectionConfig{}, true);
  Rng rng = make_rng(5);
  env.reset(rng);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector action(3);
  for (auto _ : state) {
    action << u(rng), u(rng), u(rng);
    const auto r = env.step(action);
    if (r.done()) env.reset(rng);
    benchmark::DoNotOptimize(r.phi);
  }
}
BENCHMARK(BM_InspectionStep);

void BM_CwStep(benchmark::State& state) {
  env::CwState s{env::Vec3(100, 20, -30), env::Vec3(0.1, -0.05, 0.02)};
  const env::Vec3 force(0.2, -0.1, 0.3);
  const env::CwParams params;
  for (auto _ : state) {
    s = env::cw_step(s, force, 10.0, params);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_CwStep);

}  // namespace
BENCHMARK_MAIN();

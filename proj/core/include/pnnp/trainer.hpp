#ifndef PNNP_TRAINER_HPP
#define PNNP_TRAINER_HPP

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pnnp/decouple.hpp"
#include "pnnp/distribution_loss.hpp"
#include "pnnp/proxy_model.hpp"

namespace pnnp {

struct TrainConfig {
  int steps_per_iso = 1000;
  std::size_t patch = 1024 * 1024;         // samples per step
  std::size_t queries_per_step = 1000000;  // per loss term
  double lr_base = 1e-2;
  double lr_min = 1e-5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double query_perturb_std = 1.0;  // normal-score units
  double query_clip = 6.0;         // in units of the target scale
  std::uint64_t seed = 0;
};

/// Cosine anneal from lr_base to lr_min across one ISO's step budget.
double lr_schedule(int step, int total_steps, const TrainConfig& cfg);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

/// Standard bias-corrected Adam update, in place. Throws on non-finite
/// gradients (aborted step).
void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr, const TrainConfig& cfg);

struct TrainLogEntry {
  int step = 0;  // round index within the per-ISO budget
  int iso = 0;
  double l_cdf = 0.0;
  double l_quantile = 0.0;
  double lr = 0.0;
};

/// One shared model, steps_per_iso Adam steps for every calibrated ISO.
/// Steps are interleaved round-robin (rounds outer, ISOs ascending inner)
/// so every LUT entry keeps tracking the shared branches as they evolve;
/// the cosine schedule is indexed by the round. Each step draws a fresh
/// target batch (uniform with replacement) from the ISO's pixel-noise pool.
std::vector<TrainLogEntry> train(ProxyModel& model,
                                 const std::map<int, PixelNoiseSamples>& pools,
                                 const TrainConfig& cfg);

void write_train_log(const std::vector<TrainLogEntry>& log, const std::string& path);

struct GradCheckInput {
  std::vector<double> target;
  std::vector<double> n1;
  std::vector<double> n2;
  int iso = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kink = 0;  // finite difference crossed a kink
  std::size_t skipped_zero = 0;  // both sides numerically zero
};

/// Central-difference check of the reverse-mode parameter gradients of the
/// total distribution loss. Parameters whose +-eps evaluations change the
/// bracket structure or any subgradient sign are skipped.
GradCheckResult grad_check(const ProxyModel& model, const GradCheckInput& input,
                           const QuerySet& queries, double eps);

/// Convenience builder: standard-normal n1/n2 fields and a long-tailed
/// target batch, deterministic per seed.
GradCheckInput make_grad_check_input(std::size_t count, int iso, double target_sigma,
                                     std::uint64_t seed);

}  // namespace pnnp

#endif  // PNNP_TRAINER_HPP

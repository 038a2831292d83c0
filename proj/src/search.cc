// src/search.cc

// Copyright 2026  tdnnas contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tdnnas/search.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "tdnnas/numeric.h"

namespace tdnnas {

SearchMethod SearchMethodFromString(const std::string &s) {
  if (s == "softmax-darts") return SearchMethod::kSoftmaxDarts;
  if (s == "gumbel-darts") return SearchMethod::kGumbelDarts;
  if (s == "pipe-softmax") return SearchMethod::kPipeSoftmax;
  if (s == "pipe-gumbel") return SearchMethod::kPipeGumbel;
  if (s == "random") return SearchMethod::kRandom;
  if (s == "exhaustive") return SearchMethod::kExhaustive;
  throw std::invalid_argument("unknown search method: " + s);
}

std::string SearchMethodToString(SearchMethod m) {
  switch (m) {
    case SearchMethod::kSoftmaxDarts: return "softmax-darts";
    case SearchMethod::kGumbelDarts: return "gumbel-darts";
    case SearchMethod::kPipeSoftmax: return "pipe-softmax";
    case SearchMethod::kPipeGumbel: return "pipe-gumbel";
    case SearchMethod::kRandom: return "random";
    case SearchMethod::kExhaustive: return "exhaustive";
  }
  throw std::logic_error("bad search method");
}

bool IsPipelined(SearchMethod m) {
  return m == SearchMethod::kPipeSoftmax || m == SearchMethod::kPipeGumbel;
}

bool IsGumbel(SearchMethod m) {
  return m == SearchMethod::kGumbelDarts || m == SearchMethod::kPipeGumbel;
}

void SearchConfig::Validate() const {
  if (eta < 0.0) throw std::invalid_argument("search config: eta must be >= 0");
  if (temp_end <= 0.0 || temp_start < temp_end) {
    throw std::invalid_argument("search config: need 0 < temp_end <= temp_start");
  }
  if (gumbel_samples < 1) throw std::invalid_argument("search config: J must be >= 1");
  if (epochs_search < 1 || epochs_arch < 1 || epochs_retrain < 1) {
    throw std::invalid_argument("search config: epochs must be >= 1");
  }
  if (heldout_frac <= 0.0 || heldout_frac >= 1.0) {
    throw std::invalid_argument("search config: heldout_frac must be in (0,1)");
  }
  if (batch_seqs < 1 || arch_batch_seqs < 0) {
    throw std::invalid_argument("search config: bad batch size");
  }
  if (lr_model <= 0.0 || lr_arch <= 0.0 || momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("search config: bad optimizer settings");
  }
  if (ortho_interval < 1 || ortho_nu <= 0.0 || ortho_nu > 0.5) {
    throw std::invalid_argument("search config: bad orthonormal schedule");
  }
  if (random_candidates < 1) {
    throw std::invalid_argument("search config: random_candidates must be >= 1");
  }
}

double AnnealTemperature(int64_t step, int64_t total_steps, double t_start,
                         double t_end) {
  if (t_end <= 0.0 || t_start < t_end) {
    throw std::invalid_argument("anneal_temperature: need 0 < t_end <= t_start");
  }
  if (step < 0 || (total_steps > 0 && step > total_steps)) {
    throw std::invalid_argument("anneal_temperature: step out of range");
  }
  if (total_steps <= 0) return t_end;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return t_start * std::pow(t_end / t_start, frac);
}

namespace {

std::vector<std::vector<const Sequence *>> MakeBatches(const Dataset &data,
                                                       int batch_seqs, Rng *rng) {
  const int n = static_cast<int>(data.sequences.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; i++) order[i] = i;
  for (int i = n - 1; i > 0; i--) std::swap(order[i], order[rng->UniformInt(i + 1)]);
  std::vector<std::vector<const Sequence *>> batches;
  for (int i = 0; i < n; i += batch_seqs) {
    std::vector<const Sequence *> batch;
    for (int j = i; j < std::min(n, i + batch_seqs); j++) {
      batch.push_back(&data.sequences[order[j]]);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

Metrics EvalSupernet(const Supernet &net, const LambdaSet &lam, const Dataset &data,
                     LossKind kind) {
  return Evaluate([&](const Matrix &f) { return net.ForwardLogits(f, lam); }, data, kind);
}

void LogTrajectory(const Supernet &net, int64_t step, double temperature,
                   std::vector<TrajectoryPoint> *out) {
  const LambdaSet lam = SoftmaxLambdas(net.space(), net.arch());
  for (int l = 0; l < net.space().num_layers; l++) {
    const LayerSpace &ls = net.space().layers[l];
    for (size_t a = 0; a < ls.axes.size(); a++) {
      TrajectoryPoint p;
      p.step = step;
      p.layer = l + 1;
      p.axis = AxisKindToString(ls.axes[a].kind);
      p.lambda = lam[l][a];
      p.temperature = temperature;
      out->push_back(std::move(p));
    }
  }
}

int64_t CountBatches(int n_seq, int batch_seqs) {
  return (n_seq + batch_seqs - 1) / batch_seqs;
}

[[noreturn]] void Diverged(int64_t step, const std::exception &e) {
  throw std::runtime_error("search diverged at step " + std::to_string(step) + ": " +
                           e.what());
}

}  // namespace

SearchOutcome JointDartsSearch(Supernet *net, const SearchConfig &cfg,
                               const Dataset &train, const Dataset &heldout) {
  cfg.Validate();
  if (cfg.method != SearchMethod::kSoftmaxDarts &&
      cfg.method != SearchMethod::kGumbelDarts) {
    throw std::invalid_argument("joint_darts_search: method must be a joint variant");
  }
  SearchOutcome out;
  Rng init_rng(cfg.seed, rngstream::kInit);
  net->Init(&init_rng);
  SgdOptimizer model_opt(cfg.lr_model, cfg.momentum);
  net->RegisterModelParams(&model_opt);
  SgdOptimizer arch_opt(cfg.lr_arch, cfg.momentum);
  net->arch().Register(&arch_opt);
  Rng gumbel_rng(cfg.seed, rngstream::kGumbel);
  const int64_t total_steps =
      cfg.epochs_search * CountBatches(static_cast<int>(train.sequences.size()),
                                       cfg.batch_seqs);
  int64_t step = 0;
  const int J = cfg.gumbel_samples;
  for (int epoch = 0; epoch < cfg.epochs_search; epoch++) {
    Rng shuffle_rng(MixSeed(cfg.seed, epoch), rngstream::kShuffle);
    double epoch_loss = 0.0;
    int64_t epoch_batches = 0;
    for (const auto &batch : MakeBatches(train, cfg.batch_seqs, &shuffle_rng)) {
      const double temperature =
          AnnealTemperature(step, total_steps, cfg.temp_start, cfg.temp_end);
      net->ZeroModelGrads();
      net->arch().ZeroGrads();
      double loss = 0.0;
      try {
        if (cfg.method == SearchMethod::kSoftmaxDarts) {
          const LambdaSet lam = SoftmaxLambdas(net->space(), net->arch());
          loss = net->ForwardLoss(batch, lam, cfg.loss, true, /*arch_factor=*/1.0);
          if (cfg.eta > 0.0) {
            loss += PenalizedLossTerm(net->space(), lam, cfg.eta, &net->arch(), 1.0, 1.0);
          }
        } else {
          for (int j = 0; j < J; j++) {
            const LambdaSet lam =
                SampleGumbelLambdas(net->space(), net->arch(), temperature,
                                    &gumbel_rng, nullptr);
            loss += net->ForwardLoss(batch, lam, cfg.loss, true, 1.0 / temperature,
                                     1.0 / J) /
                    J;
            if (cfg.eta > 0.0) {
              loss += PenalizedLossTerm(net->space(), lam, cfg.eta, &net->arch(),
                                        1.0 / temperature, 1.0 / J) /
                      J;
            }
          }
        }
      } catch (const std::runtime_error &e) {
        Diverged(step, e);
      }
      model_opt.Step();
      arch_opt.Step();
      if ((step + 1) % cfg.ortho_interval == 0) net->OrthonormalStep(cfg.ortho_nu);
      LogTrajectory(*net, step, temperature, &out.trajectory);
      epoch_loss += loss;
      epoch_batches++;
      step++;
    }
    const LambdaSet lam = SoftmaxLambdas(net->space(), net->arch());
    const Metrics held = EvalSupernet(*net, lam, heldout, cfg.loss);
    out.epochs.push_back(EpochMetrics{epoch + 1, "search", epoch_loss / epoch_batches,
                                      held.mean_loss, held.accuracy});
  }
  out.steps = step;
  out.derived = DeriveArchitecture(net->arch(), net->space());
  return out;
}

SearchOutcome PipelinedSearch(Supernet *net, const SearchConfig &cfg,
                              const Dataset &train, const Dataset &heldout,
                              const std::function<void(Supernet &)> &after_stage1) {
  cfg.Validate();
  if (!IsPipelined(cfg.method)) {
    throw std::invalid_argument("pipelined_search: method must be a pipelined variant");
  }
  if (heldout.sequences.empty()) {
    throw std::invalid_argument("pipelined_search: held-out split is empty");
  }
  SearchOutcome out;
  Rng init_rng(cfg.seed, rngstream::kInit);
  net->Init(&init_rng);

  // stage-1 selection counters, [layer][axis][candidate]
  out.stage1_counts.resize(net->space().num_layers);
  for (int l = 0; l < net->space().num_layers; l++) {
    for (const AxisSpace &ax : net->space().layers[l].axes) {
      out.stage1_counts[l].push_back(std::vector<int64_t>(ax.candidates.size(), 0));
    }
  }

  // Stage 1: only the shared model parameters learn; each batch trains one
  // uniformly drawn one-hot architecture per searched axis.
  SgdOptimizer model_opt(cfg.lr_model, cfg.momentum);
  net->RegisterModelParams(&model_opt);
  Rng onehot_rng(cfg.seed, rngstream::kOneHot);
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs_search; epoch++) {
    Rng shuffle_rng(MixSeed(cfg.seed, epoch), rngstream::kShuffle);
    double epoch_loss = 0.0;
    int64_t epoch_batches = 0;
    for (const auto &batch : MakeBatches(train, cfg.batch_seqs, &shuffle_rng)) {
      const auto picks = net->space().SampleUniform(&onehot_rng);
      for (int l = 0; l < net->space().num_layers; l++) {
        for (size_t a = 0; a < picks[l].size(); a++) {
          out.stage1_counts[l][a][picks[l][a]]++;
        }
      }
      net->ZeroModelGrads();
      double loss = 0.0;
      try {
        loss = net->ForwardLoss(batch, OneHotLambdas(net->space(), picks), cfg.loss,
                                true, /*arch_factor=*/0.0);
      } catch (const std::runtime_error &e) {
        Diverged(step, e);
      }
      model_opt.Step();
      if ((step + 1) % cfg.ortho_interval == 0) net->OrthonormalStep(cfg.ortho_nu);
      epoch_loss += loss;
      epoch_batches++;
      step++;
    }
    const Metrics held =
        EvalSupernet(*net, SoftmaxLambdas(net->space(), net->arch()), heldout, cfg.loss);
    out.epochs.push_back(EpochMetrics{epoch + 1, "search", epoch_loss / epoch_batches,
                                      held.mean_loss, held.accuracy});
  }
  if (after_stage1) after_stage1(*net);

  // Stage 2: model parameters frozen; only log alpha learns, on the
  // held-out split unless arch_on_train replicates the footnote setup.
  const Dataset &arch_data = cfg.arch_on_train ? train : heldout;
  const int arch_batch = cfg.arch_batch_seqs > 0 ? cfg.arch_batch_seqs : cfg.batch_seqs;
  SgdOptimizer arch_opt(cfg.lr_arch, cfg.momentum);
  net->arch().Register(&arch_opt);
  Rng gumbel_rng(cfg.seed, rngstream::kGumbel);
  const int64_t total_arch_steps =
      cfg.epochs_arch *
      CountBatches(static_cast<int>(arch_data.sequences.size()), arch_batch);
  int64_t arch_step = 0;
  const int J = cfg.gumbel_samples;
  for (int epoch = 0; epoch < cfg.epochs_arch; epoch++) {
    Rng shuffle_rng(MixSeed(cfg.seed, 100000 + epoch), rngstream::kShuffle);
    double epoch_loss = 0.0;
    int64_t epoch_batches = 0;
    for (const auto &batch : MakeBatches(arch_data, arch_batch, &shuffle_rng)) {
      const double temperature =
          AnnealTemperature(arch_step, total_arch_steps, cfg.temp_start, cfg.temp_end);
      net->ZeroModelGrads();
      net->arch().ZeroGrads();
      double loss = 0.0;
      try {
        if (cfg.method == SearchMethod::kPipeSoftmax) {
          const LambdaSet lam = SoftmaxLambdas(net->space(), net->arch());
          loss = net->ForwardLoss(batch, lam, cfg.loss, true, /*arch_factor=*/1.0);
          if (cfg.eta > 0.0) {
            loss += PenalizedLossTerm(net->space(), lam, cfg.eta, &net->arch(), 1.0, 1.0);
          }
        } else {
          for (int j = 0; j < J; j++) {
            const LambdaSet lam = SampleGumbelLambdas(net->space(), net->arch(),
                                                      temperature, &gumbel_rng, nullptr);
            loss += net->ForwardLoss(batch, lam, cfg.loss, true, 1.0 / temperature,
                                     1.0 / J) /
                    J;
            if (cfg.eta > 0.0) {
              loss += PenalizedLossTerm(net->space(), lam, cfg.eta, &net->arch(),
                                        1.0 / temperature, 1.0 / J) /
                      J;
            }
          }
        }
      } catch (const std::runtime_error &e) {
        Diverged(arch_step, e);
      }
      arch_opt.Step();  // model parameters and their projection are untouched
      LogTrajectory(*net, arch_step, temperature, &out.trajectory);
      epoch_loss += loss;
      epoch_batches++;
      arch_step++;
    }
    const Metrics held =
        EvalSupernet(*net, SoftmaxLambdas(net->space(), net->arch()), heldout, cfg.loss);
    out.epochs.push_back(EpochMetrics{epoch + 1, "arch", epoch_loss / epoch_batches,
                                      held.mean_loss, held.accuracy});
  }
  out.steps = step + arch_step;
  out.derived = DeriveArchitecture(net->arch(), net->space());
  return out;
}

int SelectCandidate(const std::vector<double> &lambda, const std::vector<int64_t> &costs) {
  if (lambda.empty() || lambda.size() != costs.size()) {
    throw std::invalid_argument("select: bad lambda/cost vectors");
  }
  int best = 0;
  for (int k = 1; k < static_cast<int>(lambda.size()); k++) {
    if (!std::isfinite(lambda[k])) throw std::invalid_argument("select: non-finite lambda");
    if (lambda[k] > lambda[best] ||
        (lambda[k] == lambda[best] && costs[k] < costs[best])) {
      best = k;
    }
  }
  return best;
}

CandidateSpec DeriveArchitecture(const ArchWeights &arch, const SearchSpace &space) {
  std::vector<std::vector<int>> picks(space.num_layers);
  for (int l = 0; l < space.num_layers; l++) {
    const LayerSpace &ls = space.layers[l];
    for (size_t a = 0; a < ls.axes.size(); a++) {
      const std::vector<double> lam = Softmax(std::vector<double>(
          arch.log_alpha[l][a].data.begin(), arch.log_alpha[l][a].data.end()));
      picks[l].push_back(SelectCandidate(lam, ls.axes[a].param_counts));
    }
  }
  return space.ResolveChoices(picks);
}

void ValidateSpec(const SearchSpace &space, const CandidateSpec &spec) {
  if (spec.input_dim != space.input_dim || spec.hidden_dim != space.hidden_dim ||
      spec.classes != space.classes ||
      static_cast<int>(spec.layers.size()) != space.num_layers) {
    throw std::invalid_argument("spec does not match the configured geometry");
  }
  for (int l = 0; l < space.num_layers; l++) {
    const LayerChoice &ch = spec.layers[l];
    const LayerSpace &ls = space.layers[l];
    const int dim_axis = ls.FindAxis(AxisKind::kBottleneckDim);
    if (ch.dim > 0 && dim_axis >= 0) {
      const auto &menu = ls.axes[dim_axis].candidates;
      if (std::find(menu.begin(), menu.end(), ch.dim) == menu.end()) {
        throw std::invalid_argument("layer " + std::to_string(l + 1) + ": dim " +
                                    std::to_string(ch.dim) +
                                    " is not in the configured menu");
      }
    }
    if (ch.left < 0 || ch.right < 0) {
      throw std::invalid_argument("layer " + std::to_string(l + 1) + ": negative offset");
    }
  }
}

RetrainResult Retrain(const CandidateSpec &spec, const SearchSpace &space,
                      const SearchConfig &cfg, const Dataset &train,
                      const Dataset &heldout, const Dataset &test, uint64_t init_seed,
                      std::unique_ptr<CandidateModel> *trained_out) {
  ValidateSpec(space, spec);
  RetrainResult result;
  result.spec = spec;
  CandidateModel model(spec, space.default_dim);
  Rng init_rng(init_seed, rngstream::kInit);
  model.Init(&init_rng);
  SgdOptimizer opt(cfg.lr_model, cfg.momentum);
  model.Register(&opt);
  int64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs_retrain; epoch++) {
    Rng shuffle_rng(MixSeed(init_seed, 200000 + epoch), rngstream::kShuffle);
    double epoch_loss = 0.0;
    int64_t epoch_batches = 0;
    for (const auto &batch : MakeBatches(train, cfg.batch_seqs, &shuffle_rng)) {
      model.ZeroGrads();
      double loss = 0.0;
      try {
        loss = ModelForwardLoss(&model, batch, cfg.loss, true);
      } catch (const std::runtime_error &e) {
        Diverged(step, e);
      }
      opt.Step();
      if ((step + 1) % cfg.ortho_interval == 0) model.OrthonormalStep(cfg.ortho_nu);
      epoch_loss += loss;
      epoch_batches++;
      step++;
    }
    const Metrics held = Evaluate(model, heldout, cfg.loss);
    result.epochs.push_back(EpochMetrics{epoch + 1, "retrain", epoch_loss / epoch_batches,
                                         held.mean_loss, held.accuracy});
  }
  result.heldout = Evaluate(model, heldout, cfg.loss);
  result.test = Evaluate(model, test, cfg.loss);
  result.param_count = model.ParamCount();
  if (trained_out != nullptr) {
    *trained_out = std::make_unique<CandidateModel>(std::move(model));
  }
  return result;
}

int WorkerCount(int configured, int jobs) {
  int n = configured > 0 ? configured
                         : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char *env = std::getenv("TDNNAS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return std::max(1, std::min(n, jobs));
}

namespace {

// Runs fn(i) for i in [0, jobs) on `workers` threads.  Each job only writes
// its own result slot, so aggregation is order-independent.
void ParallelFor(int jobs, int workers, const std::function<void(int)> &fn) {
  if (workers <= 1) {
    for (int i = 0; i < jobs; i++) fn(i);
    return;
  }
  std::atomic<int> next(0);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; w++) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread &t : pool) t.join();
  for (const std::exception_ptr &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

bool RankBetter(const RankedCandidate &a, const RankedCandidate &b) {
  if (a.heldout_accuracy != b.heldout_accuracy) {
    return a.heldout_accuracy > b.heldout_accuracy;
  }
  if (a.param_count != b.param_count) return a.param_count < b.param_count;
  return a.index < b.index;
}

}  // namespace

RandomSearchResult RandomSearch(const SearchSpace &space, const SearchConfig &cfg,
                                const Dataset &train, const Dataset &heldout,
                                const Dataset &test, int n) {
  cfg.Validate();
  if (n < 1) throw std::invalid_argument("random_search: n must be >= 1");
  Rng sample_rng(cfg.seed, rngstream::kSample);
  std::vector<CandidateSpec> specs;
  for (int i = 0; i < n; i++) {
    specs.push_back(space.ResolveChoices(space.SampleUniform(&sample_rng)));
  }
  RandomSearchResult result;
  result.all.resize(n);
  std::vector<RetrainResult> retrains(n);
  ParallelFor(n, WorkerCount(cfg.threads, n), [&](int i) {
    retrains[i] = Retrain(specs[i], space, cfg, train, heldout, test,
                          MixSeed(cfg.seed, static_cast<uint64_t>(i)));
    result.all[i] =
        RankedCandidate{static_cast<uint64_t>(i), specs[i], retrains[i].heldout.accuracy,
                        retrains[i].heldout.mean_loss, retrains[i].test.accuracy,
                        retrains[i].param_count};
  });
  int best = 0;
  for (int i = 1; i < n; i++) {
    if (RankBetter(result.all[i], result.all[best])) best = i;
  }
  result.best = result.all[best];
  result.best_retrain = std::move(retrains[best]);
  return result;
}

std::vector<RankedCandidate> ExhaustiveOracle(const SearchSpace &space,
                                              const SearchConfig &cfg,
                                              const Dataset &train,
                                              const Dataset &heldout,
                                              const Dataset &test) {
  cfg.Validate();
  const BigCount size = SearchSpaceSize(space);
  if (size.GreaterThan(cfg.enumerate_cap)) {
    throw std::invalid_argument("exhaustive_oracle: search space size " +
                                size.ToString() + " exceeds the enumeration cap " +
                                std::to_string(cfg.enumerate_cap));
  }
  std::vector<CandidateSpec> specs;
  auto picks = space.FirstChoices();
  do {
    specs.push_back(space.ResolveChoices(picks));
  } while (space.NextChoices(&picks));
  const int n = static_cast<int>(specs.size());
  std::vector<RankedCandidate> rows(n);
  ParallelFor(n, WorkerCount(cfg.threads, n), [&](int i) {
    // every enumerated candidate trains from a seed derived from its index,
    // so the oracle ranking is reproducible
    const RetrainResult r = Retrain(specs[i], space, cfg, train, heldout, test,
                                    MixSeed(cfg.seed, static_cast<uint64_t>(i)));
    rows[i] = RankedCandidate{static_cast<uint64_t>(i), specs[i], r.heldout.accuracy,
                              r.heldout.mean_loss, r.test.accuracy, r.param_count};
  });
  std::sort(rows.begin(), rows.end(), RankBetter);
  return rows;
}

}  // namespace tdnnas

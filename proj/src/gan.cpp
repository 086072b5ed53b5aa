/*
 * Copyright 2026 The Antidote Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "antidote/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "antidote/nn/optim.hpp"

namespace antidote {

using FMat = nn::Mat<float>;
using FTensor = nn::Tensor<float>;

void GanHyperparams::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(lr_generator, "generator learning rate");
  positive(lr_discriminator, "discriminator learning rate");
  positive(temperature, "Gumbel temperature");
  if (weight_decay_generator < 0 || weight_decay_discriminator < 0) {
    throw ConfigError("weight decay must be non-negative");
  }
  if (!(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (noise_dim < 0) throw ConfigError("noise dimension must be non-negative");
  if (gradient_penalty < 0) throw ConfigError("gradient penalty must be non-negative");
  if (discriminator_steps < 1) throw ConfigError("discriminator steps must be at least 1");
  if (trace_rows < 0) throw ConfigError("trace rows must be non-negative");
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
  std::string out = "epoch,sensitive,discrete,continuous,all,generator_loss,discriminator_loss\n";
  for (const auto& r : trace) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.epoch, r.sensitive, r.discrete, r.continuous, r.all,
                       r.generator_loss, r.discriminator_loss);
  }
  return out;
}

std::vector<std::vector<int>> sensitive_combinations(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> out{{}};
  for (int s : sizes) {
    std::vector<std::vector<int>> next;
    for (const auto& prefix : out) {
      for (int v = 0; v < s; ++v) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    }
    out = std::move(next);
  }
  return out;
}

int combination_index(const std::vector<int>& codes, const std::vector<int>& sizes) {
  int idx = 0;
  for (std::size_t f = 0; f < sizes.size(); ++f) idx = idx * sizes[f] + codes[f];
  return idx;
}

namespace {

FMat gather(const FMat& src, const std::vector<std::size_t>& rows) {
  FMat out(static_cast<Eigen::Index>(rows.size()), src.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(r) = src.row(rows[r]);
  return out;
}

FMat one_hot_sensitive(const std::vector<int>& codes, const std::vector<int>& sizes) {
  int width = 0;
  for (int s : sizes) width += s;
  FMat m = FMat::Zero(1, width);
  int off = 0;
  for (std::size_t f = 0; f < sizes.size(); ++f) {
    m(0, off + codes[f]) = 1.0f;
    off += sizes[f];
  }
  return m;
}

FMat generator_input(const FMat& x, const FMat& sens, int noise_dim, Rng& rng) {
  FMat in(x.rows(), x.cols() + sens.cols() + noise_dim);
  in.leftCols(x.cols()) = x;
  in.middleCols(x.cols(), sens.cols()) = sens;
  if (noise_dim > 0) in.rightCols(noise_dim) = nn::sample_normal<float>(x.rows(), noise_dim, rng);
  return in;
}

FMat critic_matrix(const FMat& candidate, const FMat& source) {
  FMat m(candidate.rows(), 3 * candidate.cols());
  const auto w = candidate.cols();
  m.leftCols(w) = candidate;
  m.middleCols(w, w) = source;
  m.rightCols(w) = candidate - source;
  return m;
}

struct TraceSet {
  std::vector<std::size_t> source;
  std::vector<std::size_t> partner;
};

TraceRow score_generations(TrainedGenerator& model, const FMat& encoded, const EncodedDataset& train,
                           const CodedTable& coded, const TraceSet& set, const ComparabilityConfig& cfg,
                           Rng& rng) {
  TraceRow row;
  if (set.source.empty()) return row;
  const auto& rep = model.rep;
  const FMat x = gather(encoded, set.source);
  const FMat sens = gather(encoded, set.partner).rightCols(rep.sensitive_width());
  const FMat in = generator_input(x, sens, model.hp.noise_dim, rng);
  model.generator.set_training(false);
  const FMat out = model.generator.forward(FTensor::constant(in), rng).rows.value();
  model.generator.set_training(true);
  std::vector<int> labels;
  for (auto s : set.source) labels.push_back(train.labels[s]);
  const EncodedDataset decoded = rep.decode(out.cast<double>(), labels);
  const CodedTable gen(decoded);
  long s_ok = 0, d_ok = 0, c_ok = 0, all_ok = 0;
  for (std::size_t k = 0; k < set.source.size(); ++k) {
    const auto src = set.source[k];
    const int* want = coded.sensitive(set.partner[k]);
    const bool s_match = std::equal(want, want + coded.num_sensitive(), gen.sensitive(k));
    int diff = 0;
    for (int d = 0; d < coded.num_discrete(); ++d) diff += gen.discrete(k)[d] != coded.discrete(src)[d];
    double gap = 0.0;
    for (int c = 0; c < coded.num_continuous(); ++c) {
      gap = std::max(gap, std::abs(gen.continuous(k)[c] - coded.continuous(src)[c]));
    }
    const bool d_match = diff <= cfg.max_discrete_diff;
    const bool c_match = gap <= cfg.max_continuous_gap;
    s_ok += s_match;
    d_ok += d_match;
    c_ok += c_match;
    all_ok += s_match && d_match && c_match;
  }
  const double n = static_cast<double>(set.source.size());
  row.sensitive = s_ok / n;
  row.discrete = d_ok / n;
  row.continuous = c_ok / n;
  row.all = all_ok / n;
  return row;
}

}  // namespace

TrainedGenerator train_generator(const EncodedDataset& train, const std::vector<ComparablePair>& pairs,
                                 const ReRepresentation& rep, const GanHyperparams& hp,
                                 const ComparabilityConfig& cfg, const EpochCallback& on_epoch) {
  hp.validate();
  if (pairs.empty()) throw ContractViolation("no comparable pairs: the pair distribution cannot be estimated");
  if (train.num_sensitive() == 0) throw ContractViolation("the generator needs at least one sensitive feature");

  TrainedGenerator model;
  model.rep = rep;
  model.hp = hp;
  Rng init_rng = make_rng(hp.seed, "gan.init");
  model.generator = Generator<float>(rep, hp.noise_dim, hp.temperature, init_rng);
  model.discriminator = Discriminator<float>(rep.width(), init_rng);

  Rng encode_rng = make_rng(hp.seed, "gan.encode");
  const FMat encoded = rep.encode(train, &encode_rng).cast<float>();
  const CodedTable coded(train);
  const int sw = rep.sensitive_width();

  auto& gen = model.generator;
  auto& disc = model.discriminator;
  nn::Adam<float> opt_g(gen.parameters(), {hp.lr_generator, hp.adam_beta1, hp.adam_beta2, 1e-8,
                                           hp.weight_decay_generator});
  nn::Adam<float> opt_d(disc.parameters(), {hp.lr_discriminator, hp.adam_beta1, hp.adam_beta2, 1e-8,
                                            hp.weight_decay_discriminator});

  Rng rng = make_rng(hp.seed, "gan.train");
  TraceSet trace_set;
  {
    Rng trng = make_rng(hp.seed, "gan.trace");
    std::vector<std::size_t> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), trng);
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(hp.trace_rows)));
    std::bernoulli_distribution flip(0.5);
    for (auto k : idx) {
      const bool swap = flip(trng);
      trace_set.source.push_back(swap ? pairs[k].j : pairs[k].i);
      trace_set.partner.push_back(swap ? pairs[k].i : pairs[k].j);
    }
  }

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::bernoulli_distribution flip(0.5);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  const float lambda = static_cast<float>(hp.gradient_penalty);

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double g_sum = 0.0, d_sum = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hp.batch_size));
      if (end - start < 2) break;  // batch norm needs two rows
      std::vector<std::size_t> src, dst;
      for (std::size_t k = start; k < end; ++k) {
        const auto& p = pairs[order[k]];
        if (flip(rng)) {
          src.push_back(p.j);
          dst.push_back(p.i);
        } else {
          src.push_back(p.i);
          dst.push_back(p.j);
        }
      }
      const FMat x = gather(encoded, src);
      const FMat xp = gather(encoded, dst);
      const FMat sens = xp.rightCols(sw);
      const FMat real = critic_matrix(xp, x);

      double d_loss = 0.0;
      for (int step = 0; step < hp.discriminator_steps; ++step) {
        const FMat fake_rows = gen.forward(FTensor::constant(generator_input(x, sens, hp.noise_dim, rng)), rng)
                                   .rows.value();
        const FMat fake = critic_matrix(fake_rows, x);
        FMat alpha(x.rows(), 1);
        for (Eigen::Index r = 0; r < alpha.rows(); ++r) alpha(r, 0) = unit(rng);
        const FMat interp = (real.array().colwise() * alpha.col(0).array() +
                             fake.array().colwise() * (1.0f - alpha.col(0).array()))
                                .matrix();
        opt_d.zero_grad();
        FTensor loss = nn::sub(nn::mean(disc.forward(FTensor::constant(fake), &rng)),
                               nn::mean(disc.forward(FTensor::constant(real), &rng)));
        if (lambda > 0) {
          const FTensor grad = disc.net().input_gradient(interp, &rng);
          const FTensor gp = nn::mean(nn::square(nn::add_scalar(nn::row_norm(grad), -1.0f)));
          loss = nn::add(loss, nn::scale(gp, lambda));
        }
        loss.backward();
        opt_d.step();
        d_loss = loss.item();
      }

      const auto out = gen.forward(FTensor::constant(generator_input(x, sens, hp.noise_dim, rng)), rng);
      FTensor ce;
      int off = 0;
      for (std::size_t f = 0; f < out.sensitive_logits.size(); ++f) {
        const int size = rep.sensitive_sizes()[f];
        const FTensor term = nn::softmax_cross_entropy(out.sensitive_logits[f], FMat(sens.middleCols(off, size)));
        ce = ce.defined() ? nn::add(ce, term) : term;
        off += size;
      }
      const FTensor critic = nn::mean(disc.forward(critic_input(out.rows, FTensor::constant(x)), &rng));
      const FTensor g_loss = nn::sub(ce, critic);
      opt_g.zero_grad();
      g_loss.backward();
      opt_g.step();
      opt_d.zero_grad();

      g_sum += g_loss.item();
      d_sum += d_loss;
      ++batches;
    }
    Rng eval_rng = make_rng(hp.seed, "gan.trace.noise", static_cast<std::uint64_t>(epoch));
    TraceRow row = score_generations(model, encoded, train, coded, trace_set, cfg, eval_rng);
    row.epoch = epoch + 1;
    row.generator_loss = batches ? g_sum / batches : 0.0;
    row.discriminator_loss = batches ? d_sum / batches : 0.0;
    model.trace.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  model.generator.set_training(false);
  model.discriminator.set_training(false);
  return model;
}

RawGeneration sample_raw(TrainedGenerator& model, const EncodedDataset& data, int iterations,
                         std::uint64_t seed, int chunk_rows) {
  if (iterations < 0) throw ContractViolation("iterations must be non-negative");
  if (chunk_rows < 1) throw ContractViolation("chunk size must be positive");
  const auto& rep = model.rep;
  const auto& sizes = data.sensitive_sizes;
  if (sizes != rep.sensitive_sizes()) throw ContractViolation("sample_raw: dataset layout does not match");
  const auto combos = sensitive_combinations(sizes);

  std::vector<std::size_t> src;
  std::vector<int> req;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const int own = combination_index(data.sensitive_codes(r), sizes);
    for (int c = 0; c < static_cast<int>(combos.size()); ++c) {
      if (c == own) continue;
      src.push_back(r);
      req.push_back(c);
    }
  }
  std::vector<FMat> combo_rows;
  for (const auto& c : combos) combo_rows.push_back(one_hot_sensitive(c, sizes));

  const FMat encoded = rep.encode(data, nullptr).cast<float>();
  const std::size_t per_iter = src.size();
  const std::size_t total = per_iter * static_cast<std::size_t>(iterations);

  RawGeneration out;
  out.rows.split = Split::kSynthetic;
  out.rows.discrete_sizes = data.discrete_sizes;
  out.rows.sensitive_sizes = data.sensitive_sizes;
  out.rows.continuous.resize(static_cast<Eigen::Index>(total), data.continuous.cols());
  out.rows.discrete.resize(static_cast<Eigen::Index>(total), data.discrete.cols());
  out.rows.sensitive.resize(static_cast<Eigen::Index>(total), data.sensitive.cols());
  out.rows.labels.reserve(total);
  out.source.reserve(total);
  out.requested.reserve(total);

  model.generator.set_training(false);
  Eigen::Index at = 0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t start = 0, chunk = 0; start < per_iter; start += chunk_rows, ++chunk) {
      const std::size_t end = std::min(per_iter, start + static_cast<std::size_t>(chunk_rows));
      std::vector<std::size_t> rows(src.begin() + start, src.begin() + end);
      FMat sens(static_cast<Eigen::Index>(rows.size()), rep.sensitive_width());
      std::vector<int> labels;
      for (std::size_t k = start; k < end; ++k) {
        sens.row(k - start) = combo_rows[req[k]];
        labels.push_back(data.labels[src[k]]);
      }
      Rng rng = make_rng(seed, "sample.chunk", static_cast<std::uint64_t>(it) * 1000003ULL + chunk);
      const FMat in = generator_input(gather(encoded, rows), sens, model.hp.noise_dim, rng);
      const FMat gen = model.generator.forward(FTensor::constant(in), rng).rows.value();
      const EncodedDataset dec = rep.decode(gen.cast<double>(), labels);
      const auto n = static_cast<Eigen::Index>(rows.size());
      out.rows.continuous.middleRows(at, n) = dec.continuous;
      out.rows.discrete.middleRows(at, n) = dec.discrete;
      out.rows.sensitive.middleRows(at, n) = dec.sensitive;
      at += n;
      out.rows.labels.insert(out.rows.labels.end(), labels.begin(), labels.end());
      out.source.insert(out.source.end(), rows.begin(), rows.end());
      out.requested.insert(out.requested.end(), req.begin() + start, req.begin() + end);
    }
  }
  return out;
}

AntidoteSet post_filter(const RawGeneration& raw, const EncodedDataset& data, const ComparabilityConfig& cfg,
                        bool require_requested_sensitive) {
  const CodedTable gen(raw.rows);
  const CodedTable src(data);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < raw.source.size(); ++k) {
    if (!is_comparable(gen, k, src, raw.source[k], cfg)) continue;
    if (require_requested_sensitive) {
      std::vector<int> codes(gen.sensitive(k), gen.sensitive(k) + gen.num_sensitive());
      if (combination_index(codes, data.sensitive_sizes) != raw.requested[k]) continue;
    }
    keep.push_back(k);
  }
  return select_antidotes(raw, keep);
}

AntidoteSet empty_antidote_set(const EncodedDataset& like) {
  AntidoteSet s;
  s.rows = select_rows(like, {});
  s.rows.split = Split::kSynthetic;
  return s;
}

AntidoteSet concat_antidotes(const AntidoteSet& a, const AntidoteSet& b) {
  AntidoteSet out;
  out.rows = concat_rows(a.rows, b.rows);
  out.rows.split = Split::kSynthetic;
  out.source = a.source;
  out.source.insert(out.source.end(), b.source.begin(), b.source.end());
  out.requested = a.requested;
  out.requested.insert(out.requested.end(), b.requested.begin(), b.requested.end());
  return out;
}

AntidoteSet select_antidotes(const AntidoteSet& set, const std::vector<std::size_t>& rows) {
  AntidoteSet out;
  out.rows = select_rows(set.rows, rows);
  for (auto r : rows) {
    out.source.push_back(set.source[r]);
    out.requested.push_back(set.requested[r]);
  }
  return out;
}

double antidote_percentage(const AntidoteSet& set, std::size_t train_rows) {
  if (train_rows == 0) return 0.0;
  return 100.0 * static_cast<double>(set.source.size()) / static_cast<double>(train_rows);
}

SampleResult sample_antidotes(TrainedGenerator& model, const EncodedDataset& train,
                              const ComparabilityConfig& cfg, const SampleOptions& options) {
  if (!(options.target_percentage >= 0)) throw ConfigError("target percentage must be non-negative");
  if (options.max_iterations < 0) throw ConfigError("max iterations must be non-negative");
  SampleResult result;
  result.set = empty_antidote_set(train);
  const auto target =
      static_cast<std::size_t>(std::ceil(options.target_percentage / 100.0 * static_cast<double>(train.rows()) - 1e-9));
  if (target == 0) {
    result.reached_target = true;
    return result;
  }
  while (result.set.source.size() < target && result.iterations < options.max_iterations) {
    const auto raw = sample_raw(model, train, 1, derive_seed(options.seed, "sample.iteration", result.iterations));
    result.set = concat_antidotes(result.set, post_filter(raw, train, cfg, options.require_requested_sensitive));
    ++result.iterations;
  }
  result.reached_target = result.set.source.size() >= target;
  if (!result.reached_target) {
    log_warning(fmt::format("sampling stopped after {} iterations with {} of {} requested antidote rows",
                            result.iterations, result.set.source.size(), target));
    return result;
  }
  std::vector<std::size_t> idx(result.set.source.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng = make_rng(options.seed, "sample.truncate");
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(target);
  std::sort(idx.begin(), idx.end());
  result.set = select_antidotes(result.set, idx);
  return result;
}

std::string antidote_to_csv(const AntidoteSet& set, const FeatureSchema& schema) {
  std::ostringstream out;
  out << "source_index";
  for (const auto& f : schema.sensitive) out << ",requested_" << f.name;
  out << ",label";
  for (const auto& f : schema.continuous) out << ',' << f.name;
  for (const auto& f : schema.discrete) out << ',' << f.name;
  for (const auto& f : schema.sensitive) out << ',' << f.name;
  out << '\n';
  const auto combos = sensitive_combinations(schema.sensitive_sizes());
  for (std::size_t r = 0; r < set.source.size(); ++r) {
    out << set.source[r];
    const auto& req = combos.at(set.requested[r]);
    for (std::size_t f = 0; f < schema.sensitive.size(); ++f) out << ',' << schema.sensitive[f].values[req[f]];
    out << ',' << set.rows.labels[r];
    for (Eigen::Index c = 0; c < set.rows.continuous.cols(); ++c) out << ',' << fmt::format("{}", set.rows.continuous(r, c));
    const auto d = set.rows.discrete_codes(r);
    for (std::size_t f = 0; f < d.size(); ++f) out << ',' << schema.discrete[f].values[d[f]];
    const auto s = set.rows.sensitive_codes(r);
    for (std::size_t f = 0; f < s.size(); ++f) out << ',' << schema.sensitive[f].values[s[f]];
    out << '\n';
  }
  return out.str();
}

}  // namespace antidote

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

#include "antidote/bundle.hpp"

#include "antidote/binary_io.hpp"
#include "antidote/keyvalue.hpp"

namespace antidote {

namespace {

constexpr char kMagic[4] = {'A', 'N', 'T', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_gmm(ByteWriter& w, const ColumnGMM& g) {
  w.put<std::int32_t>(g.column);
  w.put_vector(g.weights);
  w.put_vector(g.means);
  w.put_vector(g.stds);
}

ColumnGMM get_gmm(ByteReader& r) {
  ColumnGMM g;
  g.column = r.get<std::int32_t>();
  g.weights = r.get_vector<double>();
  g.means = r.get_vector<double>();
  g.stds = r.get_vector<double>();
  return g;
}

std::vector<std::int32_t> to_i32(const std::vector<int>& v) { return {v.begin(), v.end()}; }
std::vector<int> from_i32(const std::vector<std::int32_t>& v) { return {v.begin(), v.end()}; }

void put_hp(ByteWriter& w, const GanHyperparams& hp) {
  w.put(hp.lr_generator);
  w.put(hp.lr_discriminator);
  w.put(hp.weight_decay_generator);
  w.put(hp.weight_decay_discriminator);
  w.put(hp.adam_beta1);
  w.put(hp.adam_beta2);
  w.put<std::int32_t>(hp.batch_size);
  w.put<std::int32_t>(hp.epochs);
  w.put(hp.temperature);
  w.put<std::int32_t>(hp.noise_dim);
  w.put(hp.gradient_penalty);
  w.put<std::int32_t>(hp.discriminator_steps);
  w.put<std::int32_t>(hp.trace_rows);
  w.put<std::uint64_t>(hp.seed);
}

GanHyperparams get_hp(ByteReader& r) {
  GanHyperparams hp;
  hp.lr_generator = r.get<double>();
  hp.lr_discriminator = r.get<double>();
  hp.weight_decay_generator = r.get<double>();
  hp.weight_decay_discriminator = r.get<double>();
  hp.adam_beta1 = r.get<double>();
  hp.adam_beta2 = r.get<double>();
  hp.batch_size = r.get<std::int32_t>();
  hp.epochs = r.get<std::int32_t>();
  hp.temperature = r.get<double>();
  hp.noise_dim = r.get<std::int32_t>();
  hp.gradient_penalty = r.get<double>();
  hp.discriminator_steps = r.get<std::int32_t>();
  hp.trace_rows = r.get<std::int32_t>();
  hp.seed = r.get<std::uint64_t>();
  return hp;
}

}  // namespace

std::string ArtifactBundle::serialize() const {
  ByteWriter p;
  p.put_string(schema.to_text());
  p.put_vector(scaling.min);
  p.put_vector(scaling.max);
  p.put<std::int32_t>(comparability.max_discrete_diff);
  p.put<double>(comparability.max_continuous_gap);
  p.put<std::uint64_t>(root_seed);

  const auto& rep = model.rep;
  p.put<std::uint64_t>(rep.gmms().size());
  for (const auto& g : rep.gmms()) put_gmm(p, g);
  p.put_vector(to_i32(rep.discrete_sizes()));
  p.put_vector(to_i32(rep.sensitive_sizes()));
  put_hp(p, model.hp);
  model.generator.save(p);
  model.discriminator.save(p);
  p.put<std::uint64_t>(model.trace.size());
  for (const auto& t : model.trace) {
    p.put<std::int32_t>(t.epoch);
    for (double v : {t.sensitive, t.discrete, t.continuous, t.all, t.generator_loss, t.discriminator_loss}) p.put(v);
  }

  p.put<std::uint64_t>(classifiers.size());
  for (const auto& [name, clf] : classifiers) {
    p.put_string(name);
    clf.save(p);
  }
  p.put<std::uint64_t>(metadata.size());
  for (const auto& [k, v] : metadata) {
    p.put_string(k);
    p.put_string(v);
  }

  ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint64_t>(p.bytes().size());
  w.put_bytes(p.bytes());
  w.put<std::uint64_t>(fnv1a64(p.bytes()));
  return w.bytes();
}

ArtifactBundle ArtifactBundle::deserialize(std::string_view bytes) {
  try {
    ByteReader head(bytes);
    if (head.get_bytes(4) != std::string_view(kMagic, 4)) throw ConfigError("not an artifact bundle (bad magic)");
    const auto version = head.get<std::uint32_t>();
    if (version != kVersion) throw ConfigError("unsupported bundle version " + std::to_string(version));
    const auto size = head.get<std::uint64_t>();
    const auto payload = head.get_bytes(size);
    if (head.get<std::uint64_t>() != fnv1a64(payload)) throw ConfigError("bundle checksum mismatch");
    if (!head.at_end()) throw ConfigError("trailing bytes after bundle");

    ByteReader r(payload);
    ArtifactBundle b;
    b.schema = FeatureSchema::from_keyvalue(KeyValueFile::parse(r.get_string(), "<bundle schema>"));
    b.scaling.min = r.get_vector<double>();
    b.scaling.max = r.get_vector<double>();
    b.comparability.max_discrete_diff = r.get<std::int32_t>();
    b.comparability.max_continuous_gap = r.get<double>();
    b.root_seed = r.get<std::uint64_t>();

    std::vector<ColumnGMM> gmms(r.get<std::uint64_t>());
    for (auto& g : gmms) g = get_gmm(r);
    auto dsizes = from_i32(r.get_vector<std::int32_t>());
    auto ssizes = from_i32(r.get_vector<std::int32_t>());
    b.model.rep = ReRepresentation(std::move(gmms), std::move(dsizes), std::move(ssizes));
    b.model.hp = get_hp(r);
    Rng scratch(0);
    b.model.generator = Generator<float>(b.model.rep, b.model.hp.noise_dim, b.model.hp.temperature, scratch);
    b.model.generator.load(r);
    b.model.generator.set_training(false);
    b.model.discriminator = Discriminator<float>(b.model.rep.width(), scratch);
    b.model.discriminator.load(r);
    b.model.discriminator.set_training(false);
    b.model.trace.resize(r.get<std::uint64_t>());
    for (auto& t : b.model.trace) {
      t.epoch = r.get<std::int32_t>();
      for (double* v : {&t.sensitive, &t.discrete, &t.continuous, &t.all, &t.generator_loss, &t.discriminator_loss})
        *v = r.get<double>();
    }
    const auto nclf = r.get<std::uint64_t>();
    for (std::uint64_t k = 0; k < nclf; ++k) {
      auto name = r.get_string();
      b.classifiers.emplace_back(std::move(name), ClassifierModel::load(r));
    }
    const auto nmeta = r.get<std::uint64_t>();
    for (std::uint64_t k = 0; k < nmeta; ++k) {
      auto key = r.get_string();
      b.metadata[key] = r.get_string();
    }
    if (!r.at_end()) throw ConfigError("unexpected bytes at the end of the bundle payload");
    return b;
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError(std::string("corrupt artifact bundle: ") + e.what());
  }
}

void ArtifactBundle::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

ArtifactBundle ArtifactBundle::load(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return deserialize(bytes);
}

}  // namespace antidote

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

#include "antidote/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "antidote/binary_io.hpp"

namespace antidote {

namespace {

constexpr char kDatasetMagic[4] = {'A', 'N', 'T', 'D'};
constexpr std::uint32_t kDatasetVersion = 1;

std::vector<std::string> split_cells(std::string_view line, char delim) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    std::string cell = trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
      cell = cell.substr(1, cell.size() - 2);
    }
    cells.push_back(std::move(cell));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

void write_block(ByteWriter& w, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.put<double>(m(r, c));
}

Matrix read_block(ByteReader& r, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = r.get<double>();
  return m;
}

std::vector<int> slice_argmax(const Matrix& block, const std::vector<int>& sizes, std::size_t row) {
  std::vector<int> codes;
  codes.reserve(sizes.size());
  int off = 0;
  for (int size : sizes) {
    Eigen::Index best = 0;
    block.row(row).segment(off, size).maxCoeff(&best);
    codes.push_back(static_cast<int>(best));
    off += size;
  }
  return codes;
}

}  // namespace

RawTable parse_dataset(std::string_view text, const FeatureSchema& schema, std::string_view origin) {
  schema.validate();
  std::istringstream in{std::string(text)};
  std::string line;

  std::vector<std::string> header = schema.file_columns;
  if (header.empty()) {
    if (!std::getline(in, line)) {
      throw SchemaMismatch(std::string(origin) + ": empty file without header");
    }
    header = split_cells(line, schema.delimiter);
  }
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) column_of.emplace(header[i], i);
  auto locate = [&](const std::string& name) {
    auto it = column_of.find(name);
    if (it == column_of.end()) {
      throw SchemaMismatch(std::string(origin) + ": column '" + name + "' not found");
    }
    return it->second;
  };

  std::vector<std::size_t> cont_col, disc_col, sens_col;
  for (const auto& f : schema.continuous) cont_col.push_back(locate(f.name));
  for (const auto& f : schema.discrete) disc_col.push_back(locate(f.name));
  for (const auto& f : schema.sensitive) sens_col.push_back(locate(f.name));
  const std::size_t label_col = locate(schema.label.name);

  RawTable t;
  t.continuous.resize(cont_col.size());
  t.discrete.resize(disc_col.size());
  t.sensitive.resize(sens_col.size());

  std::vector<double> cont(cont_col.size());
  std::vector<int> disc(disc_col.size()), sens(sens_col.size());
  std::size_t unknown_categories = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line, schema.delimiter);
    bool ok = cells.size() == header.size();
    auto cell_ok = [&](std::size_t c) {
      return !cells[c].empty() && cells[c] != schema.missing_token;
    };
    for (std::size_t i = 0; ok && i < cont_col.size(); ++i) {
      ok = cell_ok(cont_col[i]) && parse_number(cells[cont_col[i]], cont[i]);
    }
    for (std::size_t i = 0; ok && i < disc_col.size(); ++i) {
      ok = cell_ok(disc_col[i]);
      if (ok) {
        disc[i] = schema.discrete[i].code_of(cells[disc_col[i]]);
        if (disc[i] < 0) ++unknown_categories, ok = false;
      }
    }
    for (std::size_t i = 0; ok && i < sens_col.size(); ++i) {
      ok = cell_ok(sens_col[i]);
      if (ok) {
        sens[i] = schema.sensitive[i].code_of(cells[sens_col[i]]);
        if (sens[i] < 0) ++unknown_categories, ok = false;
      }
    }
    ok = ok && cell_ok(label_col);
    if (!ok) {
      ++t.dropped_rows;
      continue;
    }
    const auto& lab = cells[label_col];
    const auto& pos = schema.label.positive_values;
    t.labels.push_back(std::find(pos.begin(), pos.end(), lab) != pos.end() ? 1 : 0);
    for (std::size_t i = 0; i < cont.size(); ++i) t.continuous[i].push_back(cont[i]);
    for (std::size_t i = 0; i < disc.size(); ++i) t.discrete[i].push_back(disc[i]);
    for (std::size_t i = 0; i < sens.size(); ++i) t.sensitive[i].push_back(sens[i]);
  }
  t.rows = t.labels.size();
  if (t.dropped_rows > 0) {
    log_warning(std::string(origin) + ": dropped " + std::to_string(t.dropped_rows) +
                " incomplete or invalid rows (" + std::to_string(unknown_categories) +
                " with unknown categories)");
  }
  return t;
}

RawTable load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), schema, path.string());
}

ScalingStats fit_scaling(const RawTable& train, const FeatureSchema& schema) {
  ScalingStats s;
  for (std::size_t i = 0; i < schema.continuous.size(); ++i) {
    const auto& f = schema.continuous[i];
    if (f.raw_min) {
      s.min.push_back(*f.raw_min);
      s.max.push_back(*f.raw_max);
      continue;
    }
    const auto& col = train.continuous.at(i);
    if (col.empty()) {
      s.min.push_back(0.0);
      s.max.push_back(0.0);
      continue;
    }
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    s.min.push_back(*lo);
    s.max.push_back(*hi);
  }
  return s;
}

EncodedDataset encode(const RawTable& raw, const FeatureSchema& schema, const ScalingStats& stats,
                      Split split) {
  EncodedDataset d;
  const auto n = static_cast<Eigen::Index>(raw.rows);
  d.split = split;
  d.labels = raw.labels;
  d.discrete_sizes = schema.discrete_sizes();
  d.sensitive_sizes = schema.sensitive_sizes();
  d.continuous = Matrix::Zero(n, schema.num_continuous());
  for (int f = 0; f < schema.num_continuous(); ++f) {
    const double lo = stats.min.at(f), hi = stats.max.at(f);
    if (!(hi > lo)) {
      log_warning("continuous column '" + schema.continuous[f].name +
                  "' is constant; encoded as zeros");
      continue;
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      const double v = (raw.continuous[f][r] - lo) / (hi - lo);
      d.continuous(r, f) = std::clamp(v, 0.0, 1.0);
    }
  }
  auto one_hot = [n](const std::vector<std::vector<int>>& codes, const std::vector<int>& sizes) {
    int width = 0;
    for (int s : sizes) width += s;
    Matrix m = Matrix::Zero(n, width);
    int off = 0;
    for (std::size_t f = 0; f < sizes.size(); ++f) {
      for (Eigen::Index r = 0; r < n; ++r) m(r, off + codes[f][r]) = 1.0;
      off += sizes[f];
    }
    return m;
  };
  d.discrete = one_hot(raw.discrete, d.discrete_sizes);
  d.sensitive = one_hot(raw.sensitive, d.sensitive_sizes);
  return d;
}

Matrix EncodedDataset::joined() const {
  Matrix m(static_cast<Eigen::Index>(rows()), width());
  m << continuous, discrete, sensitive;
  return m;
}

std::vector<int> EncodedDataset::discrete_codes(std::size_t row) const {
  return slice_argmax(discrete, discrete_sizes, row);
}

std::vector<int> EncodedDataset::sensitive_codes(std::size_t row) const {
  return slice_argmax(sensitive, sensitive_sizes, row);
}

void EncodedDataset::check_invariants() const {
  const auto n = static_cast<Eigen::Index>(rows());
  if (continuous.rows() != n || discrete.rows() != n || sensitive.rows() != n) {
    throw ContractViolation("encoded blocks have different row counts");
  }
  if ((continuous.array() < 0.0).any() || (continuous.array() > 1.0).any()) {
    throw ContractViolation("continuous entry outside [0,1]");
  }
  auto check_one_hot = [n](const Matrix& m, const std::vector<int>& sizes, const char* what) {
    int off = 0;
    for (int s : sizes) {
      for (Eigen::Index r = 0; r < n; ++r) {
        int ones = 0;
        for (int k = 0; k < s; ++k) {
          const double v = m(r, off + k);
          if (v == 1.0) {
            ++ones;
          } else if (v != 0.0) {
            ones = -1;
            break;
          }
        }
        if (ones != 1) throw ContractViolation(std::string("invalid one-hot slice in ") + what);
      }
      off += s;
    }
    if (off != m.cols()) throw ContractViolation(std::string("slice sizes do not cover ") + what);
  };
  check_one_hot(discrete, discrete_sizes, "discrete block");
  check_one_hot(sensitive, sensitive_sizes, "sensitive block");
  for (int y : labels) {
    if (y != 0 && y != 1) throw ContractViolation("label outside {0,1}");
  }
}

EncodedDataset select_rows(const EncodedDataset& data, const std::vector<std::size_t>& rows) {
  EncodedDataset out;
  out.split = data.split;
  out.discrete_sizes = data.discrete_sizes;
  out.sensitive_sizes = data.sensitive_sizes;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.continuous.resize(n, data.continuous.cols());
  out.discrete.resize(n, data.discrete.cols());
  out.sensitive.resize(n, data.sensitive.cols());
  out.labels.reserve(rows.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.continuous.row(i) = data.continuous.row(r);
    out.discrete.row(i) = data.discrete.row(r);
    out.sensitive.row(i) = data.sensitive.row(r);
    out.labels.push_back(data.labels[r]);
  }
  return out;
}

EncodedDataset concat_rows(const EncodedDataset& a, const EncodedDataset& b) {
  if (a.discrete_sizes != b.discrete_sizes || a.sensitive_sizes != b.sensitive_sizes ||
      a.continuous.cols() != b.continuous.cols()) {
    throw ContractViolation("concat_rows: block layouts differ");
  }
  EncodedDataset out;
  out.split = a.split;
  out.discrete_sizes = a.discrete_sizes;
  out.sensitive_sizes = a.sensitive_sizes;
  auto stack = [](const Matrix& x, const Matrix& y) {
    Matrix m(x.rows() + y.rows(), x.cols());
    if (x.rows()) m.topRows(x.rows()) = x;
    if (y.rows()) m.bottomRows(y.rows()) = y;
    return m;
  };
  out.continuous = stack(a.continuous, b.continuous);
  out.discrete = stack(a.discrete, b.discrete);
  out.sensitive = stack(a.sensitive, b.sensitive);
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

EncodedDataset drop_sensitive(const EncodedDataset& data) {
  EncodedDataset out = data;
  out.sensitive = Matrix(static_cast<Eigen::Index>(data.rows()), 0);
  out.sensitive_sizes.clear();
  return out;
}

Standardizer Standardizer::fit(const Matrix& train) {
  Standardizer s;
  const auto n = static_cast<double>(train.rows());
  s.mean_ = train.colwise().mean();
  s.scale_.resize(train.cols());
  for (Eigen::Index c = 0; c < train.cols(); ++c) {
    const double var = n > 0 ? (train.col(c).array() - s.mean_(c)).square().sum() / n : 0.0;
    const double sd = std::sqrt(var);
    s.scale_(c) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (x.cols() != mean_.size()) throw ContractViolation("Standardizer: column count mismatch");
  return ((x.rowwise() - mean_).array().rowwise() / scale_.array()).matrix();
}

std::string serialize_dataset(const EncodedDataset& data) {
  ByteWriter w;
  w.put_bytes(std::string_view(kDatasetMagic, 4));
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(data.split));
  w.put<std::uint64_t>(data.rows());
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.continuous.cols()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.discrete_sizes.size()));
  for (int s : data.discrete_sizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(data.sensitive_sizes.size()));
  for (int s : data.sensitive_sizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(s));
  write_block(w, data.continuous);
  write_block(w, data.discrete);
  write_block(w, data.sensitive);
  for (int y : data.labels) w.put<std::uint8_t>(static_cast<std::uint8_t>(y));
  return w.bytes();
}

EncodedDataset deserialize_dataset(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4) != std::string_view(kDatasetMagic, 4)) {
    throw ConfigError("not an encoded dataset file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw ConfigError("unsupported encoded dataset version " + std::to_string(version));
  }
  EncodedDataset d;
  d.split = static_cast<Split>(r.get<std::uint8_t>());
  const auto rows = r.get<std::uint64_t>();
  const auto nc = r.get<std::uint32_t>();
  auto sizes = [&r] {
    std::vector<int> s(r.get<std::uint32_t>());
    for (auto& x : s) x = static_cast<int>(r.get<std::uint32_t>());
    return s;
  };
  d.discrete_sizes = sizes();
  d.sensitive_sizes = sizes();
  int dw = 0, sw = 0;
  for (int s : d.discrete_sizes) dw += s;
  for (int s : d.sensitive_sizes) sw += s;
  d.continuous = read_block(r, rows, nc);
  d.discrete = read_block(r, rows, dw);
  d.sensitive = read_block(r, rows, sw);
  d.labels.resize(rows);
  for (auto& y : d.labels) y = r.get<std::uint8_t>();
  if (!r.at_end()) throw ConfigError("trailing bytes in encoded dataset file");
  return d;
}

void write_dataset(const std::filesystem::path& path, const EncodedDataset& data) {
  write_file_atomic(path, serialize_dataset(data));
}

EncodedDataset read_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(read_file_bytes(path));
}

}  // namespace antidote

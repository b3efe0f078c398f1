#include "dnys/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dnys/rng.hpp"

namespace dnys {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  if (begin == end) return false;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

int resolve_column(int selector, int n_cols, const char* what) {
  int col = selector >= 0 ? selector : n_cols + selector;
  if (col < 0 || col >= n_cols)
    throw std::out_of_range(std::string(what) + " column " +
                            std::to_string(selector) + " out of range for " +
                            std::to_string(n_cols) + " columns");
  return col;
}

}  // namespace

DataMatrix load_csv(const std::string& path, ColumnSelector target_column,
                    ColumnSelector label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto cells = split_line(line);
    std::vector<double> row(cells.size());
    bool numeric = true;
    std::size_t bad_col = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_double(cells[j], row[j])) {
        numeric = false;
        bad_col = j;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header row
      throw std::runtime_error(path + ": non-numeric cell at row " +
                               std::to_string(line_no) + ", column " +
                               std::to_string(bad_col + 1));
    }
    if (rows.empty()) {
      arity = row.size();
    } else if (row.size() != arity) {
      throw std::runtime_error(path + ": ragged row " +
                               std::to_string(line_no) + " (got " +
                               std::to_string(row.size()) + " cells, expected " +
                               std::to_string(arity) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no rows");

  const int n = static_cast<int>(rows.size());
  const int n_cols = static_cast<int>(arity);
  int target_col = -1, label_col = -1;
  if (target_column) target_col = resolve_column(*target_column, n_cols, "target");
  if (label_column) label_col = resolve_column(*label_column, n_cols, "label");
  if (target_col >= 0 && target_col == label_col)
    throw std::invalid_argument("target and label columns coincide");

  int d = n_cols - (target_col >= 0 ? 1 : 0) - (label_col >= 0 ? 1 : 0);
  if (d <= 0) throw std::runtime_error(path + ": no feature columns left");

  DataMatrix out;
  out.values.resize(n, d);
  if (target_col >= 0) out.target = Vector(n);
  if (label_col >= 0) out.labels = std::vector<int>(n);
  for (int i = 0; i < n; ++i) {
    int jj = 0;
    for (int j = 0; j < n_cols; ++j) {
      if (j == target_col)
        (*out.target)[i] = rows[i][j];
      else if (j == label_col)
        (*out.labels)[i] = static_cast<int>(std::llround(rows[i][j]));
      else
        out.values(i, jj++) = rows[i][j];
    }
  }
  return out;
}

std::pair<DataMatrix, StandardizeStats> standardize(
    const DataMatrix& data, const std::optional<StandardizeStats>& stats) {
  const int n = data.rows();
  const int d = data.cols();
  if (n < 1) throw std::invalid_argument("standardize: empty data");

  StandardizeStats st;
  if (stats) {
    st = *stats;
    if (st.mean.size() != d || st.stddev.size() != d)
      throw std::invalid_argument("standardize: stats dimension mismatch");
  } else {
    st.mean = data.values.colwise().mean();
    st.stddev.resize(d);
    for (int j = 0; j < d; ++j) {
      const double var =
          (data.values.col(j).array() - st.mean[j]).square().sum() / n;
      st.stddev[j] = std::sqrt(var);
    }
  }

  DataMatrix out = data;
  for (int j = 0; j < d; ++j) {
    if (st.stddev[j] > 0.0)
      out.values.col(j) = (data.values.col(j).array() - st.mean[j]) / st.stddev[j];
    else
      out.values.col(j).setZero();  // constant column
  }
  return {std::move(out), std::move(st)};
}

DataMatrix select_rows(const DataMatrix& data, const std::vector<int>& rows) {
  DataMatrix out;
  out.values.resize(static_cast<int>(rows.size()), data.cols());
  if (data.target) out.target = Vector(rows.size());
  if (data.labels) out.labels = std::vector<int>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<int>(i)) = data.values.row(rows[i]);
    if (data.target) (*out.target)[static_cast<int>(i)] = (*data.target)[rows[i]];
    if (data.labels) (*out.labels)[i] = (*data.labels)[rows[i]];
  }
  return out;
}

SplitResult split_half(const DataMatrix& data, std::uint64_t seed,
                       const Vector* leverage_scores) {
  const int n = data.rows();
  if (n < 2) throw std::invalid_argument("split_half: need n >= 2");
  Rng rng(seed);
  const int n_train = (n + 1) / 2;

  // Bucket rows: one bucket for the plain split, score deciles otherwise.
  std::vector<std::vector<int>> buckets;
  if (leverage_scores == nullptr) {
    buckets.emplace_back(n);
    std::iota(buckets[0].begin(), buckets[0].end(), 0);
  } else {
    if (leverage_scores->size() != n)
      throw std::invalid_argument("split_half: score length mismatch");
    std::vector<int> by_score(n);
    std::iota(by_score.begin(), by_score.end(), 0);
    std::stable_sort(by_score.begin(), by_score.end(), [&](int a, int b) {
      return (*leverage_scores)[a] < (*leverage_scores)[b];
    });
    buckets.resize(10);
    for (int r = 0; r < n; ++r)
      buckets[std::min<std::int64_t>(9, static_cast<std::int64_t>(r) * 10 / n)]
          .push_back(by_score[r]);
  }

  std::vector<int> train, test, leftovers;
  for (auto& bucket : buckets) {
    // shuffle within the bucket
    for (std::size_t i = bucket.size(); i > 1; --i)
      std::swap(bucket[i - 1], bucket[rng.uniform_int(static_cast<int>(i))]);
    const std::size_t half = bucket.size() / 2;
    train.insert(train.end(), bucket.begin(), bucket.begin() + half);
    test.insert(test.end(), bucket.begin() + half, bucket.begin() + 2 * half);
    if (bucket.size() % 2 != 0) leftovers.push_back(bucket.back());
  }
  // Distribute odd-bucket leftovers so the global counts stay exact.
  for (std::size_t i = leftovers.size(); i > 1; --i)
    std::swap(leftovers[i - 1], leftovers[rng.uniform_int(static_cast<int>(i))]);
  for (int v : leftovers) {
    if (static_cast<int>(train.size()) < n_train)
      train.push_back(v);
    else
      test.push_back(v);
  }

  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  SplitResult out;
  out.train = select_rows(data, train);
  out.test = select_rows(data, test);
  out.train_indices = std::move(train);
  out.test_indices = std::move(test);
  return out;
}

DataMatrix generate_toy_regression(int n, int d, double b, double noise_sigma,
                                   std::uint64_t seed) {
  if (n < 1 || d < 1)
    throw std::invalid_argument("generate_toy_regression: n, d must be >= 1");
  Rng rng(seed);
  DataMatrix out;
  out.values.resize(n, d);
  out.target = Vector(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) out.values(i, j) = rng.normal();
    (*out.target)[i] = out.values(i, 0) + b + noise_sigma * rng.normal();
  }
  return out;
}

DataMatrix generate_gaussian_clusters(const std::vector<ClusterSpec>& specs,
                                      std::uint64_t seed) {
  if (specs.empty())
    throw std::invalid_argument("generate_gaussian_clusters: no specs");
  const int d = static_cast<int>(specs[0].center.size());
  int n = 0;
  for (const auto& s : specs) {
    if (s.count < 1 || s.center.size() != d)
      throw std::invalid_argument("generate_gaussian_clusters: bad spec");
    n += s.count;
  }
  Rng rng(seed);
  DataMatrix out;
  out.values.resize(n, d);
  out.labels = std::vector<int>(n);
  int row = 0;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    for (int i = 0; i < specs[c].count; ++i, ++row) {
      for (int j = 0; j < d; ++j)
        out.values(row, j) = specs[c].center[j] + specs[c].stddev * rng.normal();
      (*out.labels)[row] = static_cast<int>(c);
    }
  }
  return out;
}

}  // namespace dnys

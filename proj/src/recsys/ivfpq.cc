#include "gesa/recsys/ivfpq.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gesa/core/random.h"
#include "gesa/core/status_macros.h"

namespace gesa::recsys {
namespace {

constexpr char kMagic[8] = {'G', 'E', 'S', 'A', 'I', 'V', 'F', '1'};
constexpr int kMaxCodes = 256;

double SquaredDistance(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return s;
}

int Nearest(const double* x, const RowMatrix& centers, int d) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < centers.rows(); ++c) {
    const double dist = SquaredDistance(x, centers.row(c).data(), d);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

bool Closer(const std::pair<double, int>& a, const std::pair<double, int>& b,
            const std::vector<std::string>& ids) {
  if (a.first != b.first) return a.first < b.first;
  return ids[a.second] < ids[b.second];
}

class Writer {
 public:
  template <typename T>
  void Put(const T& v) {
    out_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void PutDoubles(const double* p, size_t n) {
    out_.append(reinterpret_cast<const char*>(p), n * sizeof(double));
  }
  void PutBytes(const void* p, size_t n) {
    out_.append(reinterpret_cast<const char*>(p), n);
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  absl::Status Get(T& v) {
    return GetBytes(&v, sizeof(T));
  }
  absl::Status GetBytes(void* p, size_t n) {
    if (pos_ + n > in_.size()) return absl::DataLossError("index file truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
    return absl::OkStatus();
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  size_t pos_ = 0;
};

}  // namespace

RowMatrix KMeans(const RowMatrix& points, int k, int iters, uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  const int d = static_cast<int>(points.cols());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(order);
  RowMatrix centers(k, d);
  for (int c = 0; c < k; ++c) centers.row(c) = points.row(order[c % n]);
  std::vector<int> assign(n, 0);
  RowMatrix sums(k, d);
  std::vector<int> counts(k);
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < n; ++i) assign[i] = Nearest(points.row(i).data(), centers, d);
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
    }
  }
  return centers;
}

absl::StatusOr<IvfPqIndex> IvfPqIndex::Build(const VectorSet& vectors,
                                              const IvfPqConfig& config) {
  const int n = static_cast<int>(vectors.data.rows());
  const int d = static_cast<int>(vectors.data.cols());
  if (static_cast<int>(vectors.ids.size()) != n) {
    return absl::InvalidArgumentError("id count differs from vector count");
  }
  if (n == 0) return absl::InvalidArgumentError("no vectors to index");
  const int nlist = config.nlist > 0
                        ? config.nlist
                        : std::max(1, static_cast<int>(std::lround(std::sqrt(n))));
  if (n < nlist) {
    return absl::InvalidArgumentError(
        absl::StrCat("need at least nlist = ", nlist, " vectors, got ", n));
  }
  if (config.m < 1 || d % config.m != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension ", d, " not divisible by m = ", config.m));
  }
  if (config.kmeans_iters < 0) return absl::InvalidArgumentError("kmeans_iters < 0");
  {
    std::vector<std::string> sorted = vectors.ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      return absl::InvalidArgumentError("duplicate vector id");
    }
  }

  IvfPqIndex index;
  index.dimension_ = d;
  index.m_ = config.m;
  index.seed_ = config.seed;
  index.ids_ = vectors.ids;
  index.raw_ = vectors.data;
  index.centroids_ = KMeans(vectors.data, nlist, config.kmeans_iters, config.seed);
  index.lists_.assign(nlist, {});
  RowMatrix residuals(n, d);
  for (int i = 0; i < n; ++i) {
    const int list = Nearest(vectors.data.row(i).data(), index.centroids_, d);
    index.lists_[list].push_back(i);
    residuals.row(i) = vectors.data.row(i) - index.centroids_.row(list);
  }

  const int sub = d / config.m;
  index.ksub_ = std::min(kMaxCodes, n);
  index.codes_.assign(static_cast<size_t>(n) * config.m, 0);
  for (int j = 0; j < config.m; ++j) {
    const RowMatrix block = residuals.middleCols(j * sub, sub);
    RowMatrix book = KMeans(block, index.ksub_, config.kmeans_iters,
                            config.seed + 1 + static_cast<uint64_t>(j));
    for (int i = 0; i < n; ++i) {
      index.codes_[static_cast<size_t>(i) * config.m + j] =
          static_cast<uint8_t>(Nearest(block.row(i).data(), book, sub));
    }
    index.codebooks_.push_back(std::move(book));
  }
  return index;
}

absl::StatusOr<QueryResult> IvfPqIndex::Query(const Eigen::VectorXd& query, int k,
                                              int nprobe, bool rerank) const {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  if (nprobe < 1 || nprobe > nlist()) {
    return absl::InvalidArgumentError("nprobe must lie in [1, nlist]");
  }
  if (query.size() != dimension_) {
    return absl::InvalidArgumentError("query dimension differs from index");
  }
  QueryResult result;
  if (k > size()) {
    result.truncated = true;
    k = size();
  }
  std::vector<std::pair<double, int>> coarse;
  for (int c = 0; c < nlist(); ++c) {
    coarse.emplace_back(SquaredDistance(query.data(), centroids_.row(c).data(), dimension_), c);
  }
  std::sort(coarse.begin(), coarse.end());

  const int sub = dimension_ / m_;
  std::vector<double> table(static_cast<size_t>(m_) * ksub_);
  Eigen::VectorXd residual(dimension_);
  std::vector<std::pair<double, int>> hits;
  for (int p = 0; p < nprobe; ++p) {
    const int list = coarse[p].second;
    if (lists_[list].empty()) continue;
    residual = query - centroids_.row(list).transpose();
    for (int j = 0; j < m_; ++j) {
      for (int c = 0; c < ksub_; ++c) {
        table[static_cast<size_t>(j) * ksub_ + c] = SquaredDistance(
            residual.data() + j * sub, codebooks_[j].row(c).data(), sub);
      }
    }
    for (int i : lists_[list]) {
      const uint8_t* code = &codes_[static_cast<size_t>(i) * m_];
      double dist = 0.0;
      for (int j = 0; j < m_; ++j) dist += table[static_cast<size_t>(j) * ksub_ + code[j]];
      hits.emplace_back(dist, i);
    }
  }
  auto closer = [&](const auto& a, const auto& b) { return Closer(a, b, ids_); };
  const size_t keep = std::min(hits.size(), static_cast<size_t>(rerank ? 4 * k : k));
  std::partial_sort(hits.begin(), hits.begin() + keep, hits.end(), closer);
  hits.resize(keep);
  if (rerank) {
    for (auto& [dist, i] : hits) {
      dist = SquaredDistance(query.data(), raw_.row(i).data(), dimension_);
    }
    std::sort(hits.begin(), hits.end(), closer);
    if (hits.size() > static_cast<size_t>(k)) hits.resize(k);
  }
  for (const auto& [dist, i] : hits) {
    result.neighbors.push_back({ids_[i], std::sqrt(std::max(0.0, dist))});
  }
  return result;
}

VectorSet GaussianMixtureVectors(int count, int dimension, int clusters,
                                 double spread, uint64_t seed) {
  Rng rng(seed);
  RowMatrix centers(clusters, dimension);
  for (int c = 0; c < clusters; ++c) {
    for (int j = 0; j < dimension; ++j) centers(c, j) = rng.Normal();
  }
  VectorSet out;
  out.data.resize(count, dimension);
  for (int i = 0; i < count; ++i) {
    const int c = static_cast<int>(rng.UniformInt(clusters));
    for (int j = 0; j < dimension; ++j) out.data(i, j) = centers(c, j) + spread * rng.Normal();
    out.ids.push_back(absl::StrFormat("v%05d", i));
  }
  return out;
}

absl::StatusOr<QueryResult> ExactKnn(const VectorSet& vectors,
                                     const Eigen::VectorXd& query, int k) {
  if (k < 1) return absl::InvalidArgumentError("k must be >= 1");
  const int n = static_cast<int>(vectors.data.rows());
  const int d = static_cast<int>(vectors.data.cols());
  if (query.size() != d) return absl::InvalidArgumentError("query dimension mismatch");
  QueryResult result;
  if (k > n) {
    result.truncated = true;
    k = n;
  }
  std::vector<std::pair<double, int>> all;
  all.reserve(n);
  for (int i = 0; i < n; ++i) {
    all.emplace_back(SquaredDistance(query.data(), vectors.data.row(i).data(), d), i);
  }
  auto closer = [&](const auto& a, const auto& b) { return Closer(a, b, vectors.ids); };
  std::partial_sort(all.begin(), all.begin() + k, all.end(), closer);
  for (int r = 0; r < k; ++r) {
    result.neighbors.push_back({vectors.ids[all[r].second], std::sqrt(all[r].first)});
  }
  return result;
}

std::string IvfPqIndex::Serialize() const {
  Writer w;
  w.PutBytes(kMagic, sizeof(kMagic));
  w.Put(static_cast<uint32_t>(dimension_));
  w.Put(static_cast<uint32_t>(m_));
  w.Put(static_cast<uint32_t>(nlist()));
  w.Put(static_cast<uint64_t>(size()));
  w.Put(static_cast<uint32_t>(ksub_));
  w.Put(seed_);
  w.PutDoubles(centroids_.data(), centroids_.size());
  for (const RowMatrix& book : codebooks_) w.PutDoubles(book.data(), book.size());
  for (const std::vector<int>& list : lists_) {
    w.Put(static_cast<uint64_t>(list.size()));
    for (int i : list) w.Put(static_cast<uint64_t>(i));
  }
  for (const std::string& id : ids_) {
    w.Put(static_cast<uint32_t>(id.size()));
    w.PutBytes(id.data(), id.size());
  }
  w.PutBytes(codes_.data(), codes_.size());
  w.PutDoubles(raw_.data(), raw_.size());
  return w.Take();
}

absl::StatusOr<IvfPqIndex> IvfPqIndex::Deserialize(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  RETURN_IF_ERROR(r.GetBytes(magic, sizeof(magic)));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    return absl::DataLossError("not a GESAIVF1 index file");
  }
  uint32_t d, m, nlist, ksub;
  uint64_t count;
  IvfPqIndex index;
  RETURN_IF_ERROR(r.Get(d));
  RETURN_IF_ERROR(r.Get(m));
  RETURN_IF_ERROR(r.Get(nlist));
  RETURN_IF_ERROR(r.Get(count));
  RETURN_IF_ERROR(r.Get(ksub));
  RETURN_IF_ERROR(r.Get(index.seed_));
  if (m == 0 || d % m != 0 || ksub > kMaxCodes || nlist == 0 || count > (1ull << 32)) {
    return absl::DataLossError("corrupt index header");
  }
  index.dimension_ = static_cast<int>(d);
  index.m_ = static_cast<int>(m);
  index.ksub_ = static_cast<int>(ksub);
  index.centroids_.resize(nlist, d);
  RETURN_IF_ERROR(r.GetBytes(index.centroids_.data(), index.centroids_.size() * sizeof(double)));
  for (uint32_t j = 0; j < m; ++j) {
    RowMatrix book(ksub, d / m);
    RETURN_IF_ERROR(r.GetBytes(book.data(), book.size() * sizeof(double)));
    index.codebooks_.push_back(std::move(book));
  }
  index.lists_.resize(nlist);
  uint64_t listed = 0;
  for (uint32_t l = 0; l < nlist; ++l) {
    uint64_t size;
    RETURN_IF_ERROR(r.Get(size));
    if (size > count) return absl::DataLossError("corrupt inverted list");
    listed += size;
    for (uint64_t k = 0; k < size; ++k) {
      uint64_t i;
      RETURN_IF_ERROR(r.Get(i));
      if (i >= count) return absl::DataLossError("inverted list entry out of range");
      index.lists_[l].push_back(static_cast<int>(i));
    }
  }
  if (listed != count) return absl::DataLossError("inverted lists do not cover the index");
  for (uint64_t i = 0; i < count; ++i) {
    uint32_t len;
    RETURN_IF_ERROR(r.Get(len));
    std::string id(len, '\0');
    RETURN_IF_ERROR(r.GetBytes(id.data(), len));
    index.ids_.push_back(std::move(id));
  }
  index.codes_.resize(count * m);
  RETURN_IF_ERROR(r.GetBytes(index.codes_.data(), index.codes_.size()));
  index.raw_.resize(static_cast<Eigen::Index>(count), d);
  RETURN_IF_ERROR(r.GetBytes(index.raw_.data(), index.raw_.size() * sizeof(double)));
  if (!r.done()) return absl::DataLossError("trailing bytes after index data");
  return index;
}

absl::Status IvfPqIndex::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  const std::string bytes = Serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) return absl::DataLossError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::StatusOr<IvfPqIndex> IvfPqIndex::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return Deserialize(buffer.str());
}

}  // namespace gesa::recsys

#ifndef GESA_RECSYS_IVFPQ_H_
#define GESA_RECSYS_IVFPQ_H_

#include <cstdint>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace gesa::recsys {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One row per id.
struct VectorSet {
  std::vector<std::string> ids;
  RowMatrix data;
};

struct IvfPqConfig {
  int nlist = 0;  // 0: round(sqrt(count))
  int m = 8;
  int kmeans_iters = 20;
  uint64_t seed = 0;
};

struct Neighbor {
  std::string id;
  double distance = 0.0;  // Euclidean

  bool operator==(const Neighbor&) const = default;
};

struct QueryResult {
  std::vector<Neighbor> neighbors;
  bool truncated = false;  // k exceeded the indexed count
};

// Lloyd's k-means with seeded distinct-point initialization and a fixed
// number of iterations. Rows of `points` are samples. An emptied cluster
// keeps its previous centroid.
RowMatrix KMeans(const RowMatrix& points, int k, int iters, uint64_t seed);

class IvfPqIndex {
 public:
  static absl::StatusOr<IvfPqIndex> Build(const VectorSet& vectors,
                                          const IvfPqConfig& config);

  // Scans the `nprobe` nearest lists with asymmetric PQ distances. With
  // `rerank`, the best 4k PQ hits are re-scored exactly on the raw vectors.
  // Ties go to the smaller id.
  absl::StatusOr<QueryResult> Query(const Eigen::VectorXd& query, int k,
                                    int nprobe, bool rerank) const;

  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<IvfPqIndex> Load(const std::string& path);
  std::string Serialize() const;
  static absl::StatusOr<IvfPqIndex> Deserialize(const std::string& bytes);

  int dimension() const { return dimension_; }
  int m() const { return m_; }
  int nlist() const { return static_cast<int>(centroids_.rows()); }
  int ksub() const { return ksub_; }
  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::vector<int>>& lists() const { return lists_; }
  const RowMatrix& centroids() const { return centroids_; }
  const std::vector<uint8_t>& codes() const { return codes_; }
  const std::vector<std::string>& ids() const { return ids_; }

  bool operator==(const IvfPqIndex&) const = default;

 private:
  int dimension_ = 0;
  int m_ = 0;
  int ksub_ = 0;
  uint64_t seed_ = 0;
  RowMatrix centroids_;                // nlist x d
  std::vector<RowMatrix> codebooks_;   // m of ksub x (d / m)
  std::vector<std::vector<int>> lists_;  // row indices, ascending
  std::vector<std::string> ids_;
  RowMatrix raw_;                      // count x d
  std::vector<uint8_t> codes_;         // count x m
};

// `count` vectors around `clusters` centers drawn from N(0, I); each point
// adds N(0, spread^2 I). Ids are "v00000", "v00001", ...
VectorSet GaussianMixtureVectors(int count, int dimension, int clusters,
                                 double spread, uint64_t seed);

// Exhaustive Euclidean scan; ties by ascending id.
absl::StatusOr<QueryResult> ExactKnn(const VectorSet& vectors,
                                     const Eigen::VectorXd& query, int k);

}  // namespace gesa::recsys

#endif  // GESA_RECSYS_IVFPQ_H_

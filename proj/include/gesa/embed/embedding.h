#ifndef GESA_EMBED_EMBEDDING_H_
#define GESA_EMBED_EMBEDDING_H_

#include <map>
#include <string>
#include <string_view>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace gesa::embed {

// Lowercases and collapses runs of whitespace to single spaces; trims ends.
std::string NormalizeText(std::string_view text);

// Source of fixed-dimension text vectors. Implementations are read-only after
// construction.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual int dimension() const = 0;
  // True when the same text always yields the same vector.
  virtual bool deterministic() const = 0;
  // Unit-norm vector of length dimension(). Fails on empty text.
  virtual absl::StatusOr<Eigen::VectorXd> Embed(std::string_view text) const = 0;
};

// Signed feature hashing of word unigrams and bigrams.
class HashingEmbedder : public EmbeddingProvider {
 public:
  static constexpr int kDefaultDimension = 768;

  explicit HashingEmbedder(int dimension = kDefaultDimension);

  int dimension() const override { return dimension_; }
  bool deterministic() const override { return true; }
  absl::StatusOr<Eigen::VectorXd> Embed(std::string_view text) const override;

 private:
  int dimension_;
};

absl::StatusOr<Eigen::VectorXd> EmbedText(const EmbeddingProvider& provider,
                                          std::string_view text);

// v.u / (|v| |u|). Fails on dimension mismatch or a zero vector.
absl::StatusOr<double> CosineSimilarity(const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& u);

// Vectors keyed by entity id, e.g. produced by an external encoder or by graph
// training. File format: one record per line, `id<TAB>v1,v2,...,vd`.
class PrecomputedEmbeddings {
 public:
  PrecomputedEmbeddings() = default;

  absl::Status Insert(std::string id, Eigen::VectorXd vector);
  absl::StatusOr<Eigen::VectorXd> Lookup(const std::string& id) const;
  bool Contains(const std::string& id) const { return vectors_.contains(id); }

  int dimension() const { return dimension_; }
  size_t size() const { return vectors_.size(); }
  const std::map<std::string, Eigen::VectorXd>& vectors() const {
    return vectors_;
  }

  // Records in ascending id order; values printed with round-trip precision.
  std::string Serialize() const;
  static absl::StatusOr<PrecomputedEmbeddings> Parse(std::string_view text);
  static absl::StatusOr<PrecomputedEmbeddings> Load(const std::string& path);
  absl::Status Save(const std::string& path) const;

 private:
  int dimension_ = 0;
  std::map<std::string, Eigen::VectorXd> vectors_;
};

}  // namespace gesa::embed

#endif  // GESA_EMBED_EMBEDDING_H_

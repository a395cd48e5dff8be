#include "gesa/embed/embedding.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "gesa/core/dataset_io.h"
#include "gesa/core/status_macros.h"
#include "gesa/core/strings.h"

namespace gesa::embed {
namespace {

uint64_t Fnv1a(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string NormalizeText(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

HashingEmbedder::HashingEmbedder(int dimension) : dimension_(dimension) {}

absl::StatusOr<Eigen::VectorXd> HashingEmbedder::Embed(
    std::string_view text) const {
  if (dimension_ < 1) {
    return absl::FailedPreconditionError("embedding dimension must be >= 1");
  }
  const std::string normalized = NormalizeText(text);
  if (normalized.empty()) {
    return absl::InvalidArgumentError("cannot embed empty text");
  }
  std::vector<std::string_view> words =
      SplitView(normalized, ' ', /*skip_empty=*/true);

  Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
  auto add = [&](std::string_view token) {
    const uint64_t h = Fnv1a(token);
    const int bucket = static_cast<int>(h % static_cast<uint64_t>(dimension_));
    v[bucket] += (SplitMix(h) >> 63) ? -1.0 : 1.0;
  };
  for (size_t i = 0; i < words.size(); ++i) {
    add(words[i]);
    if (i + 1 < words.size()) {
      std::string bigram(words[i]);
      bigram.push_back(' ');
      bigram.append(words[i + 1]);
      add(bigram);
    }
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    // Every feature cancelled; fall back to the first unigram's bucket so the
    // vector stays unit-norm and deterministic.
    v[static_cast<int>(Fnv1a(words.front()) % dimension_)] = 1.0;
    return v;
  }
  return v / norm;
}

absl::StatusOr<Eigen::VectorXd> EmbedText(const EmbeddingProvider& provider,
                                          std::string_view text) {
  return provider.Embed(text);
}

absl::StatusOr<double> CosineSimilarity(const Eigen::VectorXd& v,
                                        const Eigen::VectorXd& u) {
  if (v.size() != u.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("dimension mismatch: ", v.size(), " vs ", u.size()));
  }
  const double nv = v.norm();
  const double nu = u.norm();
  if (nv == 0.0 || nu == 0.0) {
    return absl::InvalidArgumentError("cosine similarity of a zero vector");
  }
  const double c = v.dot(u) / (nv * nu);
  return std::clamp(c, -1.0, 1.0);
}

absl::Status PrecomputedEmbeddings::Insert(std::string id,
                                           Eigen::VectorXd vector) {
  if (id.empty() || id.find_first_of("\t\n") != std::string::npos) {
    return absl::InvalidArgumentError(absl::StrCat("bad embedding id '", id, "'"));
  }
  if (vector.size() == 0) {
    return absl::InvalidArgumentError(absl::StrCat("empty vector for ", id));
  }
  if (!vector.allFinite()) {
    return absl::InvalidArgumentError(absl::StrCat("non-finite vector for ", id));
  }
  if (dimension_ == 0) {
    dimension_ = static_cast<int>(vector.size());
  } else if (vector.size() != dimension_) {
    return absl::InvalidArgumentError(
        absl::StrCat("vector for ", id, " has dimension ", vector.size(),
                     ", expected ", dimension_));
  }
  vectors_[std::move(id)] = std::move(vector);
  return absl::OkStatus();
}

absl::StatusOr<Eigen::VectorXd> PrecomputedEmbeddings::Lookup(
    const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    return absl::NotFoundError(absl::StrCat("no embedding for '", id, "'"));
  }
  return it->second;
}

std::string PrecomputedEmbeddings::Serialize() const {
  std::string out;
  for (const auto& [id, v] : vectors_) {
    absl::StrAppend(&out, id, "\t");
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i > 0) out.push_back(',');
      absl::StrAppend(&out, absl::StrFormat("%.17g", v[i]));
    }
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<PrecomputedEmbeddings> PrecomputedEmbeddings::Parse(
    std::string_view text) {
  PrecomputedEmbeddings out;
  int line_no = 0;
  for (std::string_view line : SplitView(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("embedding line ", line_no, ": missing TAB"));
    }
    std::vector<std::string_view> fields =
        SplitView(line.substr(tab + 1), ',');
    Eigen::VectorXd v(static_cast<Eigen::Index>(fields.size()));
    for (size_t i = 0; i < fields.size(); ++i) {
      double value;
      if (!absl::SimpleAtod(
              absl::string_view(fields[i].data(), fields[i].size()), &value)) {
        return absl::InvalidArgumentError(
            absl::StrCat("embedding line ", line_no, ": bad number"));
      }
      v[static_cast<Eigen::Index>(i)] = value;
    }
    RETURN_IF_ERROR(out.Insert(std::string(line.substr(0, tab)), std::move(v)));
  }
  return out;
}

absl::StatusOr<PrecomputedEmbeddings> PrecomputedEmbeddings::Load(
    const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFileToString(path));
  return Parse(text);
}

absl::Status PrecomputedEmbeddings::Save(const std::string& path) const {
  return WriteStringToFile(Serialize(), path);
}

}  // namespace gesa::embed

#ifndef GESA_CORE_STRINGS_H_
#define GESA_CORE_STRINGS_H_

#include <string_view>
#include <vector>

namespace gesa {

// Splits on `sep`. Pieces view into `text`.
inline std::vector<std::string_view> SplitView(std::string_view text, char sep,
                                               bool skip_empty = false) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = text.find(sep, start);
    const std::string_view piece =
        text.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                          : pos - start);
    if (!skip_empty || !piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace gesa

#endif  // GESA_CORE_STRINGS_H_

#include "glomdet/rle.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "glomdet/errors.hpp"
#include "glomdet/util.hpp"

namespace glomdet::ann {

std::int64_t RleMask::set_count() const {
  std::int64_t n = 0;
  for (const auto& r : runs) n += r.length;
  return n;
}

RleMask decode_rle(std::string_view text, std::int64_t width, std::int64_t height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kMalformedRle, "mask dimensions must be >= 1");
  }
  std::vector<std::int64_t> values;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::int64_t v = 0;
    if (!parse_int64(text.substr(i, j - i), v)) {
      throw Error(ErrorCode::kMalformedRle,
                  "non-integer token '" + std::string(text.substr(i, j - i)) + "'");
    }
    values.push_back(v);
    i = j;
  }
  if (values.size() % 2 != 0) {
    throw Error(ErrorCode::kMalformedRle,
                "odd token count (" + std::to_string(values.size()) + ")");
  }

  const std::int64_t total = width * height;
  RleMask mask{width, height, {}};
  std::int64_t prev_start = 0;
  std::int64_t prev_end = 0;  // last ordinal of the previous run
  for (std::size_t k = 0; k < values.size(); k += 2) {
    const std::int64_t start = values[k];
    const std::int64_t length = values[k + 1];
    const std::size_t pair = k / 2;
    if (start < 1 || length < 1) {
      throw Error(ErrorCode::kMalformedRle,
                  "run " + std::to_string(pair) + " has start < 1 or length < 1");
    }
    if (length > total || start > total - length + 1) {
      throw Error(ErrorCode::kMalformedRle,
                  "run " + std::to_string(pair) + " ends past pixel " + std::to_string(total));
    }
    if (start < prev_start) {
      throw Error(ErrorCode::kMalformedRle,
                  "run " + std::to_string(pair) + " starts before the previous run");
    }
    if (start <= prev_end) {
      throw Error(ErrorCode::kMalformedRle,
                  "run " + std::to_string(pair) + " overlaps the previous run");
    }
    if (!mask.runs.empty() && start == prev_end + 1) {
      mask.runs.back().length += length;
    } else {
      mask.runs.push_back({start, length});
    }
    prev_start = start;
    prev_end = start + length - 1;
  }
  return mask;
}

std::string encode_rle(const RleMask& mask) {
  std::string out;
  for (const auto& r : mask.runs) {
    if (!out.empty()) out += ' ';
    out += std::to_string(r.start);
    out += ' ';
    out += std::to_string(r.length);
  }
  return out;
}

RleMask rle_from_bitmap(const Bitmap& bitmap) {
  RleMask mask{bitmap.width, bitmap.height, {}};
  std::int64_t ordinal = 0;
  for (std::int64_t x = 0; x < bitmap.width; ++x) {
    for (std::int64_t y = 0; y < bitmap.height; ++y) {
      ++ordinal;
      if (!bitmap.get(x, y)) continue;
      if (!mask.runs.empty() &&
          mask.runs.back().start + mask.runs.back().length == ordinal) {
        ++mask.runs.back().length;
      } else {
        mask.runs.push_back({ordinal, 1});
      }
    }
  }
  return mask;
}

std::string encode_rle(const Bitmap& bitmap) { return encode_rle(rle_from_bitmap(bitmap)); }

Bitmap to_bitmap(const RleMask& mask) {
  Bitmap bm(mask.width, mask.height);
  for (const auto& r : mask.runs) {
    for (std::int64_t k = r.start - 1; k < r.start - 1 + r.length; ++k) {
      bm.set(k / mask.height, k % mask.height);
    }
  }
  return bm;
}

std::vector<std::pair<std::int64_t, std::int64_t>> Component::pixels() const {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  out.reserve(static_cast<std::size_t>(pixel_count));
  for (const auto& s : segments) {
    for (std::int64_t r = s.row_begin; r < s.row_end; ++r) out.emplace_back(s.col, r);
  }
  return out;
}

namespace {

std::vector<ColumnSegment> split_by_column(const RleMask& mask) {
  std::vector<ColumnSegment> segs;
  segs.reserve(mask.runs.size());
  const std::int64_t h = mask.height;
  for (const auto& r : mask.runs) {
    std::int64_t k = r.start - 1;
    const std::int64_t end = k + r.length;
    while (k < end) {
      const std::int64_t col = k / h;
      const std::int64_t row = k % h;
      const std::int64_t take = std::min(end - k, h - row);
      segs.push_back({col, row, row + take});
      k += take;
    }
  }
  return segs;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Smaller index as root keeps component order tied to first segment.
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }
};

}  // namespace

std::vector<Component> mask_components(const RleMask& mask, Connectivity connectivity) {
  const std::vector<ColumnSegment> segs = split_by_column(mask);
  if (segs.empty()) return {};
  const std::int64_t reach = connectivity == Connectivity::kEight ? 1 : 0;
  DisjointSets sets(segs.size());

  // Segments of column c are compared against column c-1 with a merge walk.
  std::size_t prev_begin = 0, prev_end = 0;
  std::size_t cur = 0;
  while (cur < segs.size()) {
    const std::int64_t col = segs[cur].col;
    std::size_t cur_end = cur;
    while (cur_end < segs.size() && segs[cur_end].col == col) ++cur_end;
    for (std::size_t k = cur; k + 1 < cur_end; ++k) {
      if (segs[k + 1].row_begin <= segs[k].row_end) sets.unite(k, k + 1);
    }
    if (prev_end > prev_begin && segs[prev_begin].col == col - 1) {
      std::size_t a = prev_begin, b = cur;
      while (a < prev_end && b < cur_end) {
        const auto& sa = segs[a];
        const auto& sb = segs[b];
        if (sa.row_begin < sb.row_end + reach && sb.row_begin < sa.row_end + reach) {
          sets.unite(a, b);
        }
        if (sa.row_end < sb.row_end) ++a; else ++b;
      }
    }
    prev_begin = cur;
    prev_end = cur_end;
    cur = cur_end;
  }

  std::vector<Component> out;
  std::vector<std::size_t> slot(segs.size(), segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (slot[root] == segs.size()) {
      slot[root] = out.size();
      Component c;
      c.col_min = c.col_max = segs[i].col;
      c.row_min = segs[i].row_begin;
      c.row_max = segs[i].row_end - 1;
      out.push_back(std::move(c));
    }
    Component& c = out[slot[root]];
    const auto& s = segs[i];
    c.segments.push_back(s);
    c.pixel_count += s.row_end - s.row_begin;
    c.col_min = std::min(c.col_min, s.col);
    c.col_max = std::max(c.col_max, s.col);
    c.row_min = std::min(c.row_min, s.row_begin);
    c.row_max = std::max(c.row_max, s.row_end - 1);
  }
  return out;
}

}  // namespace glomdet::ann

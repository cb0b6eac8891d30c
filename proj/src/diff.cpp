#include "diff.hpp"

#include <algorithm>
#include <cstdint>
#include <string_view>
#include <tuple>
#include <unordered_map>

namespace coditkit::detail {

namespace {

using Id = std::uint32_t;

// Interns both sequences into a shared id space so the inner loops compare
// integers rather than strings.
struct Interned {
  std::vector<Id> a;
  std::vector<Id> b;
  std::size_t alphabet = 0;
};

Interned intern(const TokenSequence& a, const TokenSequence& b) {
  Interned out;
  std::unordered_map<std::string_view, Id> ids;
  ids.reserve(a.size() + b.size());
  auto id_of = [&](const std::string& tok) {
    auto [it, inserted] = ids.emplace(tok, static_cast<Id>(ids.size()));
    return it->second;
  };
  out.a.reserve(a.size());
  out.b.reserve(b.size());
  for (const auto& t : a) out.a.push_back(id_of(t));
  for (const auto& t : b) out.b.push_back(id_of(t));
  out.alphabet = ids.size();
  return out;
}

struct Block {
  std::size_t i, j, size;
};

class LongestMatchMatcher {
 public:
  explicit LongestMatchMatcher(const Interned& seqs)
      : a_(seqs.a), b_(seqs.b), b2j_(seqs.alphabet), prev_(b_.size(), 0), cur_(b_.size(), 0) {
    for (std::size_t j = 0; j < b_.size(); ++j) b2j_[b_[j]].push_back(j);
  }

  // Earliest (in a, then in b) among the longest blocks in the window.
  Block find_longest_match(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) {
    Block best{alo, blo, 0};
    touched_prev_.clear();
    for (std::size_t i = alo; i < ahi; ++i) {
      touched_cur_.clear();
      for (std::size_t j : b2j_[a_[i]]) {
        if (j < blo) continue;
        if (j >= bhi) break;
        std::size_t k = (j > 0 ? prev_[j - 1] : 0) + 1;
        cur_[j] = k;
        touched_cur_.push_back(j);
        if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
      }
      for (std::size_t j : touched_prev_) prev_[j] = 0;
      std::swap(prev_, cur_);
      std::swap(touched_prev_, touched_cur_);
    }
    for (std::size_t j : touched_prev_) prev_[j] = 0;
    return best;
  }

  std::vector<Block> matching_blocks() {
    std::vector<Block> blocks;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> queue;
    queue.emplace_back(0, a_.size(), 0, b_.size());
    while (!queue.empty()) {
      auto [alo, ahi, blo, bhi] = queue.back();
      queue.pop_back();
      Block m = find_longest_match(alo, ahi, blo, bhi);
      if (m.size == 0) continue;
      blocks.push_back(m);
      if (alo < m.i && blo < m.j) queue.emplace_back(alo, m.i, blo, m.j);
      if (m.i + m.size < ahi && m.j + m.size < bhi) {
        queue.emplace_back(m.i + m.size, ahi, m.j + m.size, bhi);
      }
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const Block& x, const Block& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });

    std::vector<Block> merged;
    for (const Block& blk : blocks) {
      if (!merged.empty() && merged.back().i + merged.back().size == blk.i &&
          merged.back().j + merged.back().size == blk.j) {
        merged.back().size += blk.size;
      } else {
        merged.push_back(blk);
      }
    }
    merged.push_back({a_.size(), b_.size(), 0});
    return merged;
  }

 private:
  const std::vector<Id>& a_;
  const std::vector<Id>& b_;
  std::vector<std::vector<std::size_t>> b2j_;
  std::vector<std::size_t> prev_;
  std::vector<std::size_t> cur_;
  std::vector<std::size_t> touched_prev_;
  std::vector<std::size_t> touched_cur_;
};

std::vector<Opcode> longest_match_opcodes(const Interned& seqs) {
  LongestMatchMatcher matcher(seqs);
  std::vector<Opcode> ops;
  std::size_t i = 0, j = 0;
  for (const Block& blk : matcher.matching_blocks()) {
    if (i < blk.i && j < blk.j) {
      ops.push_back({OpKind::Replace, i, blk.i, j, blk.j});
    } else if (i < blk.i) {
      ops.push_back({OpKind::Delete, i, blk.i, j, blk.j});
    } else if (j < blk.j) {
      ops.push_back({OpKind::Insert, i, blk.i, j, blk.j});
    }
    i = blk.i + blk.size;
    j = blk.j + blk.size;
    if (blk.size > 0) ops.push_back({OpKind::Keep, blk.i, i, blk.j, j});
  }
  return ops;
}

// Single-token steps of an alignment path.
enum class Step : std::uint8_t { Match, Delete, Insert, Substitute };

std::vector<Opcode> levenshtein_opcodes(const Interned& seqs) {
  const auto& a = seqs.a;
  const auto& b = seqs.b;
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t width = m + 1;

  // dist[i * width + j] = edit distance between a[i:] and b[j:].
  std::vector<std::uint32_t> dist((n + 1) * width);
  for (std::size_t j = 0; j <= m; ++j) dist[n * width + j] = static_cast<std::uint32_t>(m - j);
  for (std::size_t i = n; i-- > 0;) {
    std::uint32_t* row = &dist[i * width];
    const std::uint32_t* below = &dist[(i + 1) * width];
    row[m] = static_cast<std::uint32_t>(n - i);
    const Id ai = a[i];
    for (std::size_t j = m; j-- > 0;) {
      if (ai == b[j]) {
        row[j] = below[j + 1];
      } else {
        row[j] = 1 + std::min({below[j], row[j + 1], below[j + 1]});
      }
    }
  }

  // Forward trace: taking a match whenever heads agree is always optimal and
  // yields the leftmost alignment; other ties resolve Delete, Insert, Substitute.
  std::vector<Opcode> ops;
  auto push = [&](OpKind kind, std::size_t i1, std::size_t i2, std::size_t j1, std::size_t j2) {
    if (!ops.empty()) {
      Opcode& last = ops.back();
      bool last_edit = last.kind != OpKind::Keep;
      bool this_edit = kind != OpKind::Keep;
      if (last_edit == this_edit) {
        last.i2 = i2;
        last.j2 = j2;
        if (this_edit && last.kind != kind) last.kind = OpKind::Replace;
        return;
      }
    }
    ops.push_back({kind, i1, i2, j1, j2});
  };

  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const std::uint32_t here = dist[i * width + j];
    if (i < n && j < m && a[i] == b[j]) {
      push(OpKind::Keep, i, i + 1, j, j + 1);
      ++i, ++j;
    } else if (i < n && dist[(i + 1) * width + j] + 1 == here) {
      push(OpKind::Delete, i, i + 1, j, j);
      ++i;
    } else if (j < m && dist[i * width + j + 1] + 1 == here) {
      push(OpKind::Insert, i, i, j, j + 1);
      ++j;
    } else {
      push(OpKind::Replace, i, i + 1, j, j + 1);
      ++i, ++j;
    }
  }
  return ops;
}

}  // namespace

std::vector<Opcode> diff_opcodes(const TokenSequence& a, const TokenSequence& b,
                                 DiffBackend backend) {
  Interned seqs = intern(a, b);
  switch (backend) {
    case DiffBackend::ContiguousLongestMatch:
      return longest_match_opcodes(seqs);
    case DiffBackend::MinimalLevenshtein:
      return levenshtein_opcodes(seqs);
  }
  return {};
}

}  // namespace coditkit::detail

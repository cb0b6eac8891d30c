#pragma once

#include <cstddef>
#include <vector>

#include "coditkit/edit_plan.hpp"

namespace coditkit::detail {

// Half-open ranges a[i1, i2) -> b[j1, j2). Keep marks an equal block.
struct Opcode {
  OpKind kind;
  std::size_t i1, i2, j1, j2;
};

// Covers both sequences completely and in order; adjacent opcodes never share
// a kind.
std::vector<Opcode> diff_opcodes(const TokenSequence& a, const TokenSequence& b,
                                 DiffBackend backend);

}  // namespace coditkit::detail

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "coditkit/error.hpp"

namespace coditkit::cli {

using Json = nlohmann::ordered_json;

// Flag combinations the command cannot run with; exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

// Non-blank lines in file order, without line terminators.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// One JSON object per non-blank line. Throws ParseError naming path and line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);

// All files become visible together or not at all: each is written to a
// sibling temporary, then every temporary is renamed into place.
void write_files_atomically(const std::vector<std::pair<std::filesystem::path, std::string>>& files);

std::string to_jsonl(const std::vector<Json>& records);

// Evaluates fn(i) for i in [0, n) on up to `workers` threads. Results keep
// index order; when several calls throw, the lowest index's exception wins.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t workers, Fn fn) {
  std::vector<T> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(workers, n));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace coditkit::cli

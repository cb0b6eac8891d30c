#pragma once

// Runs the built command-line tool against generated fixture files.

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "coditkit/edit_plan.hpp"

#ifndef CODITKIT_CLI_PATH
#error "CODITKIT_CLI_PATH must name the command-line executable"
#endif

namespace coditkit::testing {

namespace fs = std::filesystem;

class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("coditkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ignored;
    fs::remove_all(path_, ignored);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Exit status of the tool; stderr goes to `stderr_file` when given.
inline int run_cli(const std::string& args, const std::string& env = "",
                   const fs::path& stderr_file = {}) {
  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string("\"") + CODITKIT_CLI_PATH + "\" " + args;
  cmd += stderr_file.empty() ? " 2>/dev/null" : " 2>\"" + stderr_file.string() + "\"";
  cmd += " >/dev/null";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

inline std::string words(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                         std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len), sym(0, alphabet - 1);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    if (i) out += ' ';
    out += "w" + std::to_string(sym(rng));
  }
  return out;
}

inline TokenSequence split(const std::string& text) {
  TokenSequence out;
  std::istringstream in(text);
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

inline std::string join(const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) out += (i ? " " : "") + seq[i];
  return out;
}

// One fixture file per command family, each with `records` records.
inline void write_cli_fixtures(const fs::path& dir, std::size_t records) {
  using nlohmann::json;
  std::mt19937_64 rng(20240611);
  std::string corpus, pairs, cu, bf, cr, preds, plans, cands;
  json report_a, report_b;
  json ids = json::array(), per_a = json::array(), per_b = json::array();
  std::uniform_real_distribution<double> logp(-20.0, -0.1), unit(0.0, 1.0);
  for (std::size_t i = 0; i < records; ++i) {
    const std::string id = "r" + std::to_string(i);
    if (i % 10 == 0) {
      corpus += json{{"id", id}, {"text", "@param users List of user objects"},
                     {"noise", json::array({{{"start", 1}, {"length", 1}, {"kind", "mask-span"}},
                                            {{"start", 4}, {"length", 1}, {"kind", "delete-span"}}})}}
                    .dump() +
                "\n";
    } else {
      corpus += words(rng, 0, 60, 30) + "\n";
    }
    std::string src = words(rng, 1, 20, 8), tgt = words(rng, 1, 20, 8);
    pairs += json{{"id", id}, {"source", src}, {"target", tgt}}.dump() + "\n";
    cu += json{{"id", id}, {"old_comment", src}, {"old_code", words(rng, 1, 20, 8)},
               {"new_code", words(rng, 1, 20, 8)}, {"new_comment", tgt}}
              .dump() +
          "\n";
    bf += json{{"id", id}, {"buggy", src}, {"guidance", words(rng, 0, 5, 8)},
               {"context", words(rng, 0, 10, 8)}, {"fixed", tgt}}
              .dump() +
          "\n";
    cr += json{{"id", id}, {"code_before", src}, {"review_comment", words(rng, 1, 8, 8)},
               {"code_after", tgt}}
              .dump() +
          "\n";
    std::string pred = i % 3 == 0 ? src : i % 3 == 1 ? tgt : words(rng, 1, 20, 8);
    if (i % 4 == 0) {
      pred = join(serialize_plan(compute_edit_script(split(src), split(pred)))) + " <s> " + pred;
    }
    preds += json{{"id", id}, {"prediction", pred}}.dump() + "\n";
    plans += json{{"id", id},
                  {"source", src},
                  {"plan", join(serialize_plan(compute_edit_script(split(src), split(tgt))))},
                  {"target", i % 7 == 0 ? words(rng, 1, 20, 8) : tgt}}
                 .dump() +
             "\n";
    json list = json::array();
    for (int k = 0; k < 10; ++k) {
      list.push_back({{"tokens", json(split(words(rng, 1, 8, 8)))},
                      {"own_logprob", logp(rng)},
                      {"own_length", 1 + rng() % 12},
                      {"cross_logprob", logp(rng)},
                      {"cross_length", 1 + rng() % 12}});
    }
    cands += json{{"id", id}, {"candidates", list}}.dump() + "\n";
    ids.push_back(id);
    per_a.push_back(unit(rng));
    per_b.push_back(unit(rng));
  }
  report_a = {{"ids", ids}, {"metrics", {{"sari", {{"per_example", per_a}}}}}};
  report_b = {{"ids", ids}, {"metrics", {{"sari", {{"per_example", per_b}}}}}};
  write_text(dir / "corpus.txt", corpus);
  write_text(dir / "stats.json",
             json{{"p_insert", 0.2}, {"p_delete", 0.3}, {"p_replace", 0.5},
                  {"mean_span_len", 3.0}, {"mean_spans_per_seq", 2.0}}
                 .dump());
  write_text(dir / "pairs.jsonl", pairs);
  write_text(dir / "comment_update.jsonl", cu);
  write_text(dir / "bugfix.jsonl", bf);
  write_text(dir / "code_review.jsonl", cr);
  write_text(dir / "predictions.jsonl", preds);
  write_text(dir / "plans.jsonl", plans);
  write_text(dir / "candidates.jsonl", cands);
  write_text(dir / "report_a.json", report_a.dump());
  write_text(dir / "report_b.json", report_b.dump());
}

struct CommandCase {
  std::string name;
  std::string args;  // everything except --output and --workers
};

// Every subcommand, over the files written by write_cli_fixtures.
inline std::vector<CommandCase> command_cases(const fs::path& dir) {
  auto f = [&](const char* name) { return "\"" + (dir / name).string() + "\""; };
  return {
      {"span-stats", "span-stats --input " + f("pairs.jsonl")},
      {"span-stats-task", "span-stats --task comment-update --input " + f("comment_update.jsonl")},
      {"gen-pretrain",
       "gen-pretrain --input " + f("corpus.txt") + " --stats " + f("stats.json") +
           " --seed 7 --verify"},
      {"gen-finetune-cu", "gen-finetune --task comment-update --input " + f("comment_update.jsonl")},
      {"gen-finetune-bf", "gen-finetune --task bugfix --input " + f("bugfix.jsonl")},
      {"gen-finetune-cr", "gen-finetune --task code-review --input " + f("code_review.jsonl")},
      {"parse-plan", "parse-plan --input " + f("plans.jsonl")},
      {"apply-plan", "apply-plan --input " + f("plans.jsonl")},
      {"check-consistency", "check-consistency --input " + f("plans.jsonl")},
      {"evaluate",
       "evaluate --task comment-update --input " + f("comment_update.jsonl") + " --predictions " +
           f("predictions.jsonl")},
      {"copy-rate",
       "copy-rate --task comment-update --input " + f("comment_update.jsonl") + " --predictions " +
           f("predictions.jsonl")},
      {"rerank", "rerank --direction edit-reranked-with-gen --input " + f("candidates.jsonl")},
      {"significance",
       "significance --metric sari --seed 11 --input-a " + f("report_a.json") + " --input-b " +
           f("report_b.json")},
  };
}

struct DeterminismOutcome {
  bool ok = true;
  std::string detail;
};

// Each case runs twice with one worker and once with eight; the output and
// manifest files of all three runs must be byte-identical.
inline DeterminismOutcome check_determinism(const fs::path& dir) {
  DeterminismOutcome outcome;
  for (const auto& c : command_cases(dir)) {
    std::vector<std::string> outputs, manifests;
    const std::pair<const char*, int> runs[] = {{"a", 1}, {"b", 1}, {"c", 8}};
    for (const auto& [tag, workers] : runs) {
      fs::path out = dir / (c.name + "." + tag + ".out");
      int rc = run_cli(c.args + " --workers " + std::to_string(workers) + " --output \"" +
                       out.string() + "\"");
      if (rc != 0) {
        outcome.ok = false;
        outcome.detail += c.name + " exited " + std::to_string(rc) + "; ";
        break;
      }
      outputs.push_back(read_text(out));
      manifests.push_back(read_text(out.string() + ".manifest.json"));
    }
    if (outputs.size() != 3) continue;
    if (outputs[0].empty() || outputs[0] != outputs[1] || outputs[0] != outputs[2] ||
        manifests[0] != manifests[1] || manifests[0] != manifests[2]) {
      outcome.ok = false;
      outcome.detail += c.name + " differs; ";
    }
  }
  return outcome;
}

}  // namespace coditkit::testing

#include "commands.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "coditkit/edit_plan.hpp"
#include "coditkit/error.hpp"
#include "coditkit/metrics.hpp"
#include "coditkit/noising.hpp"
#include "coditkit/rerank.hpp"
#include "coditkit/rng.hpp"
#include "coditkit/task_formats.hpp"
#include "coditkit/tokens.hpp"
#include "io.hpp"

namespace coditkit::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string input;
  std::string output;
  std::string vocab;
  std::string merges;
  std::string stats;
  std::string task;
  std::string backend{to_string(DiffBackend::ContiguousLongestMatch)};
  std::string policy{to_string(ApplyPolicy::LeftmostCursor)};
  std::string predictions;
  std::string metrics = "xmatch,bleu4,gleu,sari";
  std::string direction;
  std::string input_a;
  std::string input_b;
  std::string metric;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::size_t iterations = kMinBootstrapIterations;
  double confidence = 0.95;
  bool verify = false;
};

// Output document plus the command-specific part of the run manifest.
struct Result {
  std::string content;
  Json manifest = Json::object();
};

struct Context {
  const Options& opts;
  const Tokenizer& tokenizer;
};

// ---------------------------------------------------------------------------
// Record helpers

std::string id_of(const Json& record, std::size_t index) {
  auto it = record.find("id");
  if (it == record.end() || it->is_null()) return std::to_string(index);
  return it->is_string() ? it->get<std::string>() : it->dump();
}

std::string where(const std::string& id) { return "record " + id; }

// Array fields are taken as tokens verbatim. String fields are tokenized;
// raw text is sanitized first so literal marker strings cannot act as markers.
TokenSequence tokens_of(const Json& value, const Tokenizer& tok, bool raw_text,
                        const std::string& context) {
  if (value.is_array()) {
    TokenSequence out;
    for (const auto& t : value) {
      if (!t.is_string()) throw ParseError(context + ": token arrays must hold strings");
      out.push_back(t.get<std::string>());
    }
    return out;
  }
  if (value.is_string()) {
    const auto& text = value.get_ref<const std::string&>();
    return raw_text ? tok.tokenize(sanitize(text)) : tok.tokenize(text);
  }
  throw ParseError(context + ": expected a string or an array of tokens");
}

TokenSequence field(const Json& record, const std::string& name, const Tokenizer& tok,
                    bool raw_text, const std::string& id) {
  auto it = record.find(name);
  if (it == record.end() || it->is_null()) {
    throw ParseError(where(id) + ": missing field \"" + name + "\"");
  }
  return tokens_of(*it, tok, raw_text, where(id) + " field \"" + name + "\"");
}

TokenSequence optional_field(const Json& record, const std::string& name, const Tokenizer& tok,
                             bool raw_text, const std::string& id) {
  auto it = record.find(name);
  if (it == record.end() || it->is_null()) return {};
  return tokens_of(*it, tok, raw_text, where(id) + " field \"" + name + "\"");
}

bool has_field(const Json& record, const std::string& name) {
  auto it = record.find(name);
  return it != record.end() && !it->is_null();
}

double number(const Json& record, const std::string& name, const std::string& context) {
  auto it = record.find(name);
  if (it == record.end() || !it->is_number()) {
    throw ParseError(context + ": field \"" + name + "\" must be a number");
  }
  return it->get<double>();
}

std::size_t count(const Json& record, const std::string& name, const std::string& context) {
  auto it = record.find(name);
  if (it == record.end() || !it->is_number_unsigned()) {
    throw ParseError(context + ": field \"" + name + "\" must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

Json to_json(const TokenSequence& seq) { return Json(seq); }

// ---------------------------------------------------------------------------
// Option parsing helpers

Task parse_task(const std::string& name) {
  auto task = task_from_string(name);
  if (!task) throw UsageError("unknown task \"" + name + "\"");
  return *task;
}

DiffBackend parse_backend(const std::string& name) {
  auto backend = diff_backend_from_string(name);
  if (!backend) throw UsageError("unknown diff backend \"" + name + "\"");
  return *backend;
}

std::vector<Metric> parse_metrics(const std::string& list) {
  std::vector<Metric> out;
  std::string item;
  auto flush = [&] {
    if (item.empty()) return;
    auto m = metric_from_string(item);
    if (!m) throw UsageError("unknown metric \"" + item + "\"");
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    item.clear();
  };
  for (char c : list) {
    if (c == ',') {
      flush();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      item += c;
    }
  }
  flush();
  if (out.empty()) throw UsageError("--metrics names no metric");
  return out;
}

// ---------------------------------------------------------------------------
// Task records

struct TaskRecord {
  std::string id;
  TokenSequence input;
  TokenSequence editable;
  std::optional<TokenSequence> gold;
};

const char* gold_field(Task task) {
  switch (task) {
    case Task::CommentUpdate:
      return "new_comment";
    case Task::BugFix:
      return "fixed";
    case Task::CodeReview:
      return "code_after";
  }
  return "";
}

const char* editable_field(Task task) {
  switch (task) {
    case Task::CommentUpdate:
      return "old_comment";
    case Task::BugFix:
      return "buggy";
    case Task::CodeReview:
      return "code_before";
  }
  return "";
}

TaskRecord load_task_record(Task task, const Json& rec, std::size_t index, const Tokenizer& tok,
                            bool build_input) {
  TaskRecord out;
  out.id = id_of(rec, index);
  const std::string& id = out.id;
  out.editable = field(rec, editable_field(task), tok, true, id);
  if (has_field(rec, gold_field(task))) out.gold = field(rec, gold_field(task), tok, true, id);
  if (!build_input) return out;
  switch (task) {
    case Task::CommentUpdate:
      out.input = build_comment_update_input({out.editable, field(rec, "old_code", tok, true, id),
                                              field(rec, "new_code", tok, true, id), {}});
      break;
    case Task::BugFix:
      out.input = build_bugfix_input({out.editable, optional_field(rec, "guidance", tok, true, id),
                                      optional_field(rec, "context", tok, true, id), {}});
      break;
    case Task::CodeReview:
      out.input = build_code_review_input(
          {out.editable, field(rec, "review_comment", tok, true, id), {}});
      break;
  }
  return out;
}

TokenSequence require_gold(const TaskRecord& rec, Task task) {
  if (!rec.gold) {
    throw ParseError(where(rec.id) + ": missing field \"" + gold_field(task) + "\"");
  }
  return *rec.gold;
}

// Predictions keyed by id; a duplicate id is a data error.
std::unordered_map<std::string, Json> load_predictions(const fs::path& path) {
  std::unordered_map<std::string, Json> out;
  auto records = read_jsonl(path);
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string id = id_of(records[i], i);
    auto it = records[i].find("prediction");
    if (it == records[i].end()) throw ParseError(where(id) + ": missing field \"prediction\"");
    if (!out.emplace(id, *it).second) throw ParseError("duplicate prediction id " + id);
  }
  return out;
}

struct Scored {
  TokenSequence prediction;
  TaskRecord task;
  bool missing_separator = false;
};

std::vector<Scored> join_predictions(const Context& ctx, Task task) {
  auto tasks = read_jsonl(ctx.opts.input);
  auto preds = load_predictions(ctx.opts.predictions);
  if (preds.size() != tasks.size()) {
    throw LengthMismatch(preds.size(), tasks.size());
  }
  return parallel_map<Scored>(tasks.size(), ctx.opts.workers, [&](std::size_t i) {
    Scored s;
    s.task = load_task_record(task, tasks[i], i, ctx.tokenizer, false);
    auto it = preds.find(s.task.id);
    if (it == preds.end()) throw ParseError("no prediction for id " + s.task.id);
    auto extracted = extract_target(
        tokens_of(it->second, ctx.tokenizer, false, where(s.task.id) + " prediction"));
    s.prediction = std::move(extracted.target);
    s.missing_separator = extracted.missing_separator;
    return s;
  });
}

// ---------------------------------------------------------------------------
// Commands

Result cmd_span_stats(const Context& ctx) {
  const DiffBackend backend = parse_backend(ctx.opts.backend);
  std::optional<Task> task;
  if (!ctx.opts.task.empty()) task = parse_task(ctx.opts.task);
  auto records = read_jsonl(ctx.opts.input);
  using Pair = std::pair<TokenSequence, TokenSequence>;
  auto pairs = parallel_map<Pair>(records.size(), ctx.opts.workers, [&](std::size_t i) {
    if (task) {
      TaskRecord rec = load_task_record(*task, records[i], i, ctx.tokenizer, false);
      return Pair{rec.editable, require_gold(rec, *task)};
    }
    std::string id = id_of(records[i], i);
    return Pair{field(records[i], "source", ctx.tokenizer, true, id),
                field(records[i], "target", ctx.tokenizer, true, id)};
  });
  SpanStats stats = compute_span_stats(pairs, backend);
  Json doc = {{"p_insert", stats.p_insert},
              {"p_delete", stats.p_delete},
              {"p_replace", stats.p_replace},
              {"mean_span_len", stats.mean_span_len},
              {"mean_spans_per_seq", stats.mean_spans_per_seq},
              {"pairs", pairs.size()}};
  Result r;
  r.content = doc.dump(2) + "\n";
  r.manifest["options"] = {{"backend", to_string(backend)},
                           {"task", task ? Json(std::string(to_string(*task))) : Json()}};
  r.manifest["decisions"] = {
      {"span_length", "new length for insert, old length for delete, max of both for replace"},
      {"spans_per_seq", "diff operations divided by pairs, unchanged pairs included"},
      {"probabilities", "operation-kind frequencies over all diff operations"}};
  r.manifest["records"] = {{"read", records.size()}, {"written", 1}};
  return r;
}

SpanStats load_stats(const fs::path& path) {
  Json doc = read_json(path);
  if (!doc.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  const std::string ctx = path.string();
  SpanStats stats;
  stats.p_insert = number(doc, "p_insert", ctx);
  stats.p_delete = number(doc, "p_delete", ctx);
  stats.p_replace = number(doc, "p_replace", ctx);
  stats.mean_span_len = number(doc, "mean_span_len", ctx);
  stats.mean_spans_per_seq = number(doc, "mean_spans_per_seq", ctx);
  stats.validate();
  return stats;
}

NoiseSpec parse_noise(const Json& value, const std::string& context) {
  if (!value.is_array()) throw ParseError(context + ": \"noise\" must be an array");
  NoiseSpec spec;
  for (const auto& span : value) {
    if (!span.is_object()) throw ParseError(context + ": noise spans must be objects");
    auto kind_it = span.find("kind");
    if (kind_it == span.end() || !kind_it->is_string()) {
      throw ParseError(context + ": noise span lacks a \"kind\" string");
    }
    auto kind = noise_kind_from_string(kind_it->get<std::string>());
    if (!kind) throw ParseError(context + ": unknown noise kind " + kind_it->dump());
    spec.push_back({count(span, "start", context), count(span, "length", context), *kind});
  }
  return spec;
}

Result cmd_gen_pretrain(const Context& ctx) {
  std::optional<SpanStats> stats;
  if (!ctx.opts.stats.empty()) stats = load_stats(ctx.opts.stats);
  auto lines = read_lines(ctx.opts.input);
  auto examples =
      parallel_map<std::optional<Json>>(lines.size(), ctx.opts.workers, [&](std::size_t i) {
        const std::string& line = lines[i];
        Json record;
        const auto first = line.find_first_not_of(" \t");
        if (line[first] == '{') {
          try {
            record = Json::parse(line);
          } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("corpus record " + std::to_string(i) + ": " + e.what());
          }
        } else {
          record = {{"text", line}};
        }
        const std::string id = id_of(record, i);
        TokenSequence seq = field(record, "text", ctx.tokenizer, true, id);
        if (!length_filter(seq)) return std::optional<Json>{};
        PretrainExample ex;
        if (has_field(record, "noise")) {
          ex = make_pretrain_example(seq, parse_noise(record["noise"], where(id)), id);
        } else {
          if (!stats) throw UsageError(where(id) + " has no \"noise\" override and --stats is unset");
          Rng rng = derive_rng(ctx.opts.seed, i);
          ex = make_pretrain_example(seq, *stats, rng, id);
        }
        if (ctx.opts.verify && !verify_example(ex)) {
          throw Error("ReconstructionFailed", where(id) + ": plan does not rebuild the target");
        }
        return std::optional<Json>(Json{{"id", ex.id},
                                        {"corrupted", to_json(ex.corrupted)},
                                        {"edit_plan", to_json(ex.edit_plan)},
                                        {"target", to_json(ex.target)}});
      });
  std::vector<Json> kept;
  for (auto& e : examples) {
    if (e) kept.push_back(std::move(*e));
  }
  Result r;
  r.content = to_jsonl(kept);
  r.manifest["options"] = {{"verify", ctx.opts.verify}};
  if (stats) {
    r.manifest["options"]["stats"] = {{"p_insert", stats->p_insert},
                                      {"p_delete", stats->p_delete},
                                      {"p_replace", stats->p_replace},
                                      {"mean_span_len", stats->mean_span_len},
                                      {"mean_spans_per_seq", stats->mean_spans_per_seq}};
  }
  r.manifest["decisions"] = {
      {"span_length_distribution", kSpanLengthDistribution},
      {"span_count_distribution", kSpanCountDistribution},
      {"kind_mapping", "insert->delete-span, delete->insert-mask, replace->mask-span"},
      {"span_separation", "sampled spans keep at least one untouched token between them"},
      {"min_host_length", kMinHostLength},
      {"mask_collapse", "one [MASK] replaces a whole masked span"},
      {"length_filter", "3 <= tokens <= 512, others skipped"},
      {"rng", "mt19937_64 seeded from splitmix64 of (seed, record index)"},
      {"diff_backend", to_string(DiffBackend::ContiguousLongestMatch)},
      {"text_sanitization", "literal marker strings in text are escaped with backslashes"}};
  r.manifest["records"] = {
      {"read", lines.size()}, {"written", kept.size()}, {"skipped", lines.size() - kept.size()}};
  return r;
}

Result cmd_gen_finetune(const Context& ctx) {
  const Task task = parse_task(ctx.opts.task);
  auto records = read_jsonl(ctx.opts.input);
  auto out = parallel_map<Json>(records.size(), ctx.opts.workers, [&](std::size_t i) {
    TaskRecord rec = load_task_record(task, records[i], i, ctx.tokenizer, true);
    Json j = {{"id", rec.id}, {"input", to_json(rec.input)}, {"editable", to_json(rec.editable)}};
    if (rec.gold) j["target"] = to_json(wrap_generation_as_edit_output(rec.editable, *rec.gold));
    return j;
  });
  Result r;
  r.content = to_jsonl(out);
  r.manifest["options"] = {{"task", to_string(task)}};
  r.manifest["decisions"] = {
      {"separator", "<s> between input segments and between plan and target"},
      {"segment_order", task == Task::BugFix ? "buggy <s> guidance <s> context"
                        : task == Task::CommentUpdate ? "old_comment <s> keep-annotated code diff"
                                                      : "code_before <s> review_comment"},
      {"target", "serialized plan of editable -> gold, then <s>, then gold"},
      {"diff_backend", to_string(DiffBackend::ContiguousLongestMatch)}};
  r.manifest["records"] = {{"read", records.size()}, {"written", out.size()}};
  return r;
}

Json operations_json(const EditPlan& plan) {
  Json ops = Json::array();
  for (const auto& op : plan.operations) {
    ops.push_back({{"kind", to_string(op.kind)},
                   {"old", to_json(op.old_span)},
                   {"new", to_json(op.new_span)}});
  }
  return ops;
}

Result cmd_parse_plan(const Context& ctx) {
  auto records = read_jsonl(ctx.opts.input);
  auto out = parallel_map<Json>(records.size(), ctx.opts.workers, [&](std::size_t i) {
    const std::string id = id_of(records[i], i);
    EditPlan plan = parse_plan(field(records[i], "plan", ctx.tokenizer, false, id));
    return Json{{"id", id}, {"operations", operations_json(plan)}};
  });
  Result r;
  r.content = to_jsonl(out);
  r.manifest["records"] = {{"read", records.size()}, {"written", out.size()}};
  return r;
}

Result cmd_apply_plan(const Context& ctx) {
  auto policy = apply_policy_from_string(ctx.opts.policy);
  if (!policy) throw UsageError("unknown apply policy \"" + ctx.opts.policy + "\"");
  auto records = read_jsonl(ctx.opts.input);
  auto out = parallel_map<Json>(records.size(), ctx.opts.workers, [&](std::size_t i) {
    const std::string id = id_of(records[i], i);
    EditPlan plan = parse_plan(field(records[i], "plan", ctx.tokenizer, false, id));
    TokenSequence source = field(records[i], "source", ctx.tokenizer, false, id);
    return Json{{"id", id}, {"result", to_json(apply_plan(plan, source, *policy))}};
  });
  Result r;
  r.content = to_jsonl(out);
  r.manifest["options"] = {{"policy", to_string(*policy)}};
  r.manifest["decisions"] = {
      {"serialized_positions", "parsed plans carry no positions; positional policy rejects them"}};
  r.manifest["records"] = {{"read", records.size()}, {"written", out.size()}};
  return r;
}

Result cmd_check_consistency(const Context& ctx) {
  auto records = read_jsonl(ctx.opts.input);
  auto out = parallel_map<Json>(records.size(), ctx.opts.workers, [&](std::size_t i) {
    const std::string id = id_of(records[i], i);
    ConsistencyReport rep =
        check_consistency(field(records[i], "plan", ctx.tokenizer, false, id),
                          field(records[i], "source", ctx.tokenizer, false, id),
                          field(records[i], "target", ctx.tokenizer, false, id));
    return Json{{"id", id},
                {"consistent", rep.consistent},
                {"applied_result", rep.applied_result ? to_json(*rep.applied_result) : Json()},
                {"divergence_index", rep.divergence_index ? Json(*rep.divergence_index) : Json()}};
  });
  std::size_t consistent = 0;
  for (const auto& j : out) consistent += j["consistent"].get<bool>() ? 1 : 0;
  Result r;
  r.content = to_jsonl(out);
  r.manifest["decisions"] = {
      {"consistency",
       "operations placed in order, each at or after the previous one, must rebuild the target; "
       "leftmost placement reported"},
      {"unparsable_plan", "reported as inconsistent with no applied result"}};
  r.manifest["records"] = {
      {"read", records.size()}, {"written", out.size()}, {"consistent", consistent}};
  return r;
}

Json metric_metadata(std::uint64_t seed) {
  return {{"seed", seed},
          {"variants",
           {{"xmatch", "exact token-sequence match"},
            {"bleu4", kBleuVariant},
            {"gleu", kGleuVariant},
            {"sari", kSariVariant}}},
          {"meteor", "not computed"},
          {"matching", "case-sensitive, whitespace-collapsed tokens"},
          {"prediction_target", "tokens after the first <s>; the whole output when absent"}};
}

Result cmd_evaluate(const Context& ctx) {
  const Task task = parse_task(ctx.opts.task);
  const std::vector<Metric> metrics = parse_metrics(ctx.opts.metrics);
  auto scored = join_predictions(ctx, task);
  for (const auto& s : scored) require_gold(s.task, task);

  Json report;
  report["count"] = scored.size();
  Json ids = Json::array();
  std::size_t missing_separator = 0;
  for (const auto& s : scored) {
    ids.push_back(s.task.id);
    missing_separator += s.missing_separator ? 1 : 0;
  }
  report["ids"] = ids;
  report["missing_separator"] = missing_separator;
  report["metrics"] = Json::object();
  for (Metric m : metrics) {
    auto per = parallel_map<double>(scored.size(), ctx.opts.workers, [&](std::size_t i) {
      return score(m, scored[i].prediction, *scored[i].task.gold, scored[i].task.editable);
    });
    report["metrics"][std::string(to_string(m))] = {{"corpus", scored.empty() ? 0.0 : mean(per)},
                                                    {"per_example", per}};
  }
  report["metadata"] = metric_metadata(ctx.opts.seed);
  report["metadata"]["task"] = to_string(task);

  Result r;
  r.content = report.dump(2) + "\n";
  r.manifest["options"] = {{"task", to_string(task)}, {"metrics", report["metrics"].size()}};
  r.manifest["decisions"] = report["metadata"];
  r.manifest["records"] = {{"read", scored.size()}, {"written", 1}};
  return r;
}

Result cmd_copy_rate(const Context& ctx) {
  const Task task = parse_task(ctx.opts.task);
  auto scored = join_predictions(ctx, task);
  std::vector<TokenSequence> preds, editable;
  for (auto& s : scored) {
    preds.push_back(s.prediction);
    editable.push_back(s.task.editable);
  }
  const double rate = copy_rate(preds, editable);
  std::size_t copied = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) copied += preds[i] == editable[i] ? 1 : 0;
  Json doc = {{"copy_rate", rate}, {"copied", copied}, {"count", preds.size()},
              {"editable_field", editable_field(task)}};
  Result r;
  r.content = doc.dump(2) + "\n";
  r.manifest["options"] = {{"task", to_string(task)}};
  r.manifest["decisions"] = {
      {"editable_portion", editable_field(task)},
      {"prediction_target", "tokens after the first <s>; the whole output when absent"}};
  r.manifest["records"] = {{"read", preds.size()}, {"written", 1}};
  return r;
}

Result cmd_rerank(const Context& ctx) {
  auto direction = rerank_direction_from_string(ctx.opts.direction);
  if (!direction) throw UsageError("unknown rerank direction \"" + ctx.opts.direction + "\"");
  auto records = read_jsonl(ctx.opts.input);
  auto out = parallel_map<Json>(records.size(), ctx.opts.workers, [&](std::size_t i) {
    const std::string id = id_of(records[i], i);
    auto it = records[i].find("candidates");
    if (it == records[i].end() || !it->is_array()) {
      throw ParseError(where(id) + ": \"candidates\" must be an array");
    }
    std::vector<Candidate> cands;
    for (std::size_t k = 0; k < it->size(); ++k) {
      const Json& c = (*it)[k];
      const std::string ctx_name = where(id) + " candidate " + std::to_string(k);
      if (!c.is_object()) throw ParseError(ctx_name + ": expected an object");
      Candidate cand;
      cand.tokens = field(c, "tokens", ctx.tokenizer, false, id);
      cand.own_logprob = number(c, "own_logprob", ctx_name);
      cand.own_length = count(c, "own_length", ctx_name);
      if (has_field(c, "cross_logprob")) cand.cross_logprob = number(c, "cross_logprob", ctx_name);
      if (has_field(c, "cross_length")) cand.cross_length = count(c, "cross_length", ctx_name);
      cands.push_back(std::move(cand));
    }
    RerankedList ranked = rerank(cands, *direction);
    Json rec = records[i];
    Json list = Json::array();
    for (const auto& rc : ranked) {
      Json c = (*it)[rc.beam_rank];
      c["beam_rank"] = rc.beam_rank;
      c["combined_score"] = rc.combined_score;
      list.push_back(std::move(c));
    }
    rec["candidates"] = std::move(list);
    return rec;
  });
  Result r;
  r.content = to_jsonl(out);
  r.manifest["options"] = {{"direction", to_string(*direction)}};
  r.manifest["decisions"] = {
      {"combined_score", "own_logprob/own_length + cross_logprob/cross_length"},
      {"ties", "original beam order"}};
  r.manifest["records"] = {{"read", records.size()}, {"written", out.size()}};
  return r;
}

struct ReportScores {
  Json ids;
  std::vector<double> scores;
};

ReportScores report_scores(const fs::path& path, const std::string& metric) {
  Json doc = read_json(path);
  const std::string ctx = path.string();
  if (!doc.is_object() || !doc.contains("metrics") || !doc["metrics"].contains(metric)) {
    throw ParseError(ctx + ": report has no metric \"" + metric + "\"");
  }
  const Json& per = doc["metrics"][metric]["per_example"];
  if (!per.is_array()) throw ParseError(ctx + ": per_example must be an array");
  ReportScores out;
  out.ids = doc.contains("ids") ? doc["ids"] : Json();
  for (const auto& v : per) {
    if (!v.is_number()) throw ParseError(ctx + ": per_example scores must be numbers");
    out.scores.push_back(v.get<double>());
  }
  return out;
}

Result cmd_significance(const Context& ctx) {
  if (!metric_from_string(ctx.opts.metric)) {
    throw UsageError("unknown metric \"" + ctx.opts.metric + "\"");
  }
  ReportScores a = report_scores(ctx.opts.input_a, ctx.opts.metric);
  ReportScores b = report_scores(ctx.opts.input_b, ctx.opts.metric);
  if (a.scores.size() != b.scores.size()) throw LengthMismatch(a.scores.size(), b.scores.size());
  if (a.ids != b.ids) throw ParseError("reports cover different example ids");
  Rng rng = derive_rng(ctx.opts.seed, 0);
  SignificanceResult res = bootstrap_test(a.scores, b.scores, ctx.opts.iterations, rng,
                                          ctx.opts.confidence);
  Json doc = {{"metric", ctx.opts.metric},
              {"count", a.scores.size()},
              {"mean_a", mean(a.scores)},
              {"mean_b", mean(b.scores)},
              {"observed_delta", res.observed_delta},
              {"p_value", res.p_value},
              {"iterations", res.iterations},
              {"confidence", res.confidence},
              {"significant", res.significant()}};
  Result r;
  r.content = doc.dump(2) + "\n";
  r.manifest["options"] = {{"metric", ctx.opts.metric},
                           {"iterations", ctx.opts.iterations},
                           {"confidence", ctx.opts.confidence}};
  r.manifest["decisions"] = {
      {"test", "paired bootstrap over example indices"},
      {"p_value", "twice the fraction of resamples whose mean delta does not keep the observed "
                  "sign, clamped to 1"},
      {"rng", "mt19937_64 seeded from splitmix64 of (seed, 0), single-threaded"}};
  r.manifest["records"] = {{"read", a.scores.size()}, {"written", 1}};
  return r;
}

// ---------------------------------------------------------------------------
// Driver

std::string env_name(const std::string& flag) {
  std::string out = "CODITKIT_";
  for (char c : flag) {
    out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

template <typename T>
CLI::Option* option(CLI::App* app, const std::string& flag, T& value, const std::string& help) {
  return app->add_option("--" + flag, value, help)->envname(env_name(flag));
}

struct Command {
  CLI::App* app;
  std::function<Result(const Context&)> fn;
};

void add_io(CLI::App* app, Options& o, bool with_input = true) {
  if (with_input) option(app, "input", o.input, "input file")->required()->check(CLI::ExistingFile);
  option(app, "output", o.output, "output file; a manifest is written beside it")->required();
  option(app, "seed", o.seed, "global random seed")->capture_default_str();
  option(app, "workers", o.workers, "worker threads")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
  option(app, "vocab", o.vocab, "tokenizer vocabulary file")->check(CLI::ExistingFile);
  option(app, "merges", o.merges, "tokenizer merges file (byte-pair encoding)")
      ->check(CLI::ExistingFile);
}

Json manifest_inputs(const Options& o) {
  Json inputs = Json::object();
  auto put = [&](const char* name, const std::string& value) {
    if (!value.empty()) inputs[name] = value;
  };
  put("input", o.input);
  put("stats", o.stats);
  put("predictions", o.predictions);
  put("input_a", o.input_a);
  put("input_b", o.input_b);
  put("vocab", o.vocab);
  put("merges", o.merges);
  return inputs;
}

void report_error(const std::string& code, const std::string& message) {
  Json err = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Edit-plan data, evaluation and reranking toolkit", "coditkit"};
  app.set_version_flag("--version", CODITKIT_VERSION);
  app.require_subcommand(1);

  std::vector<Command> commands;

  auto* span = app.add_subcommand("span-stats", "edit statistics of source/target pairs");
  add_io(span, o);
  option(span, "task", o.task, "read pairs from a task file (editable -> gold)");
  option(span, "backend", o.backend, "diff backend")->capture_default_str();
  commands.push_back({span, cmd_span_stats});

  auto* pre = app.add_subcommand("gen-pretrain", "corrupt a corpus into pretraining examples");
  add_io(pre, o);
  option(pre, "stats", o.stats, "span statistics JSON")->check(CLI::ExistingFile);
  pre->add_flag("--verify", o.verify, "check every example rebuilds its target")
      ->envname(env_name("verify"));
  commands.push_back({pre, cmd_gen_pretrain});

  auto* fine = app.add_subcommand("gen-finetune", "build model inputs and targets for a task");
  add_io(fine, o);
  option(fine, "task", o.task, "comment-update, bugfix or code-review")->required();
  commands.push_back({fine, cmd_gen_finetune});

  auto* parse = app.add_subcommand("parse-plan", "parse serialized edit plans");
  add_io(parse, o);
  commands.push_back({parse, cmd_parse_plan});

  auto* apply = app.add_subcommand("apply-plan", "apply edit plans to source sequences");
  add_io(apply, o);
  option(apply, "policy", o.policy, "positional, leftmost-cursor or strict")->capture_default_str();
  commands.push_back({apply, cmd_apply_plan});

  auto* check = app.add_subcommand("check-consistency", "check plan/source/target triples");
  add_io(check, o);
  commands.push_back({check, cmd_check_consistency});

  auto* eval = app.add_subcommand("evaluate", "score predictions against a task file");
  add_io(eval, o);
  option(eval, "task", o.task, "comment-update, bugfix or code-review")->required();
  option(eval, "predictions", o.predictions, "prediction JSONL {id, prediction}")
      ->required()
      ->check(CLI::ExistingFile);
  option(eval, "metrics", o.metrics, "comma-separated metric names")->capture_default_str();
  commands.push_back({eval, cmd_evaluate});

  auto* copy = app.add_subcommand("copy-rate", "fraction of predictions copying the input");
  add_io(copy, o);
  option(copy, "task", o.task, "comment-update, bugfix or code-review")->required();
  option(copy, "predictions", o.predictions, "prediction JSONL {id, prediction}")
      ->required()
      ->check(CLI::ExistingFile);
  commands.push_back({copy, cmd_copy_rate});

  auto* rr = app.add_subcommand("rerank", "rerank beams with a second model's scores");
  add_io(rr, o);
  option(rr, "direction", o.direction, "edit-reranked-with-gen or gen-reranked-with-edit")
      ->required();
  commands.push_back({rr, cmd_rerank});

  auto* sig = app.add_subcommand("significance", "paired bootstrap test between two reports");
  add_io(sig, o, false);
  option(sig, "input-a", o.input_a, "evaluate report of system A")
      ->required()
      ->check(CLI::ExistingFile);
  option(sig, "input-b", o.input_b, "evaluate report of system B")
      ->required()
      ->check(CLI::ExistingFile);
  option(sig, "metric", o.metric, "metric to compare")->required();
  option(sig, "iterations", o.iterations, "bootstrap resamples")->capture_default_str();
  option(sig, "confidence", o.confidence, "confidence level")->capture_default_str();
  commands.push_back({sig, cmd_significance});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitSuccess : kExitUsage;
  }

  const Command* selected = nullptr;
  for (const auto& c : commands) {
    if (c.app->parsed()) selected = &c;
  }

  try {
    if (!o.merges.empty() && o.vocab.empty()) throw UsageError("--merges requires --vocab");
    Tokenizer tokenizer = o.vocab.empty()
                              ? Tokenizer()
                              : load_tokenizer(o.vocab, o.merges.empty()
                                                            ? std::nullopt
                                                            : std::optional<fs::path>(o.merges));
    Context ctx{o, tokenizer};
    Result result = selected->fn(ctx);

    Json manifest;
    manifest["command"] = selected->app->get_name();
    manifest["versions"] = {{"coditkit", CODITKIT_VERSION},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"cli11", CLI11_VERSION}};
    manifest["seed"] = o.seed;
    manifest["inputs"] = manifest_inputs(o);
    manifest["tokenizer"] =
        tokenizer.kind() == TokenizerKind::BytePairEncoding ? "bpe" : "whitespace";
    for (auto& [key, value] : result.manifest.items()) manifest[key] = value;

    fs::path output = o.output;
    fs::path manifest_path = output;
    manifest_path += ".manifest.json";
    write_files_atomically({{output, result.content}, {manifest_path, manifest.dump(2) + "\n"}});
    return kExitSuccess;
  } catch (const UsageError& e) {
    report_error("UsageError", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(e.code(), e.what());
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    report_error("ParseError", e.what());
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    report_error("IoError", e.what());
    return kExitData;
  }
}

}  // namespace coditkit::cli

#include "symnum/corpus.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"  // vendored nlohmann single header

#include "symnum/numeric.hpp"
#include "symnum/parse.hpp"

namespace symnum::corpus {
namespace {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

CorpusEntry entry_from_json(const json& j, int line_no) {
  CorpusEntry e;
  if (!j.is_object()) {
    e.id = "line" + std::to_string(line_no);
    e.load_error = "entry is not a JSON object";
    return e;
  }
  if (j.contains("id") && j["id"].is_string())
    e.id = j["id"].get<std::string>();
  else
    e.id = "line" + std::to_string(line_no);
  if (j.contains("integrand") && j["integrand"].is_string()) {
    e.integrand = j["integrand"].get<std::string>();
  } else {
    e.load_error = "missing integrand";
    return e;
  }
  if (j.contains("expected") && j["expected"].is_string())
    e.expected = j["expected"].get<std::string>();
  if (j.contains("tags") && j["tags"].is_array())
    for (const auto& t : j["tags"])
      if (t.is_string()) e.tags.push_back(t.get<std::string>());
  return e;
}

// d/dx(found - expected) must vanish at a handful of sample points; catches
// answers that verify against the integrand but differ from the reference by
// more than a constant (i.e. a verification escape).
std::string cross_check(const Expr& found, const std::string& expected_text,
                        const std::string& var, std::uint64_t seed) {
  Expr expected = Expr::integer(0);
  try {
    expected = parse(expected_text);
  } catch (const std::exception&) {
    return "mismatch";
  }
  Expr dy = differentiate(found, var);
  Expr de = differentiate(expected, var);
  std::mt19937_64 rng(splitmix64(seed ^ 0x63726f7373ull));  // "cross"
  int checked = 0;
  for (int draws = 0; draws < 200 && checked < 5; ++draws) {
    Complex z = numeric::disk_point(rng, 1.5);
    Complex a = evaluate(dy, z);
    Complex b = evaluate(de, z);
    if (!is_finite(a) || !is_finite(b)) continue;
    if (std::abs(a) > 1e8 || std::abs(b) > 1e8) continue;  // near a pole
    if (std::abs(a - b) > 1e-6 * (1.0 + std::abs(b))) return "mismatch";
    ++checked;
  }
  return checked == 5 ? "ok" : "mismatch";
}

EntryResult run_one(const CorpusEntry& entry, const CorpusOptions& opts) {
  EntryResult r;
  r.entry = entry;
  if (entry.load_error) {
    r.outcome = "error";
    r.detail = *entry.load_error;
    return r;
  }
  auto t0 = std::chrono::steady_clock::now();
  Expr f = Expr::integer(0);
  try {
    f = parse(entry.integrand);
  } catch (const std::exception& ex) {
    r.outcome = "error";
    r.detail = ex.what();
    return r;
  }
  integrator::IntegratorConfig cfg = opts.config;
  cfg.sampler.rng_seed = entry_seed(opts.seed, entry.id);
  if (opts.timeout_seconds > 0.0)
    cfg.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(opts.timeout_seconds));
  integrator::IntegrationResult res = integrator::integrate(f, cfg);
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res.solved) {
    r.outcome = "failure";
    r.detail = res.failure_reason;
    return r;
  }
  r.outcome = "success";
  r.antiderivative = res.antiderivative->str();
  r.residual = res.residual;
  r.generator_index = res.generator_index;
  if (entry.expected) {
    auto vars = free_symbols(f);
    std::string var = vars.empty() ? "x" : vars.front();
    r.expected_check = cross_check(*res.antiderivative, *entry.expected, var,
                                   cfg.sampler.rng_seed);
  }
  return r;
}

}  // namespace

std::vector<CorpusEntry> load_jsonl(std::istream& in) {
  std::vector<CorpusEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      CorpusEntry e;
      e.id = "line" + std::to_string(line_no);
      e.load_error = "malformed JSON";
      entries.push_back(std::move(e));
      continue;
    }
    entries.push_back(entry_from_json(j, line_no));
  }
  return entries;
}

std::vector<CorpusEntry> load_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  return load_jsonl(in);
}

std::uint64_t entry_seed(std::uint64_t global_seed, const std::string& id) {
  return splitmix64(global_seed ^ fnv1a64(id));
}

RunReport run_corpus(const std::vector<CorpusEntry>& entries,
                     const CorpusOptions& opts) {
  RunReport report;
  report.entries.resize(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      report.entries[i] = run_one(entries[i], opts);
    }
  };
  int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || entries.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  report.aggregates["all"];  // an empty corpus still reports Total 0
  for (const auto& r : report.entries) {
    std::vector<std::string> groups = r.entry.tags;
    groups.push_back("all");
    for (const auto& tag : groups) {
      TagCounts& c = report.aggregates[tag];
      c.total += 1;
      if (r.outcome == "success")
        c.success += 1;
      else if (r.outcome == "failure")
        c.failure += 1;
      else
        c.error += 1;
    }
  }
  return report;
}

std::string report_json(const RunReport& report, bool include_timing) {
  json j;
  j["entries"] = json::array();
  for (const auto& r : report.entries) {
    json e;
    e["id"] = r.entry.id;
    e["integrand"] = r.entry.integrand;
    e["tags"] = r.entry.tags;
    e["outcome"] = r.outcome;
    e["antiderivative"] = r.antiderivative;
    e["residual"] = r.residual;
    e["generator_index"] = r.generator_index;
    e["detail"] = r.detail;
    e["expected_check"] = r.expected_check;
    if (include_timing) e["wall_seconds"] = r.wall_seconds;
    j["entries"].push_back(std::move(e));
  }
  j["aggregates"] = json::object();
  for (const auto& [tag, c] : report.aggregates) {
    j["aggregates"][tag] = {{"success", c.success},
                            {"failure", c.failure},
                            {"error", c.error},
                            {"total", c.total}};
  }
  return j.dump(2) + "\n";
}

std::string report_table(const RunReport& report) {
  std::size_t width = 3;  // "tag"
  for (const auto& [tag, c] : report.aggregates) width = std::max(width, tag.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %7s  %7s  %7s  %7s\n", (int)width, "tag",
                "success", "failure", "error", "total");
  out << buf;
  for (const auto& [tag, c] : report.aggregates) {
    std::snprintf(buf, sizeof buf, "%-*s  %7d  %7d  %7d  %7d\n", (int)width,
                  tag.c_str(), c.success, c.failure, c.error, c.total);
    out << buf;
  }
  return out.str();
}

}  // namespace symnum::corpus

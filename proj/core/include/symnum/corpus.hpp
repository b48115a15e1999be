#pragma once

// Golden-corpus harness: load JSONL problem sets, run the integrator over
// them (optionally in a worker pool), and aggregate outcomes per tag.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symnum/integrator.hpp"

namespace symnum::corpus {

struct CorpusEntry {
  std::string id;
  std::string integrand;
  std::optional<std::string> expected;  // known antiderivative, cross-checked
  std::vector<std::string> tags;
  // set when the JSONL line could not be parsed; such entries run as errors
  std::optional<std::string> load_error;
};

// One JSON object per line.  A malformed line becomes an entry carrying
// load_error instead of aborting the whole load.
std::vector<CorpusEntry> load_jsonl(std::istream& in);
std::vector<CorpusEntry> load_jsonl_file(const std::string& path);

struct EntryResult {
  CorpusEntry entry;
  std::string outcome;  // "success" | "failure" | "error"
  std::string antiderivative;
  double residual = 0.0;
  int generator_index = -1;
  double wall_seconds = 0.0;
  std::string detail;          // failure reason / error message
  std::string expected_check;  // "" (no expected) | "ok" | "mismatch"
};

struct TagCounts {
  int success = 0;
  int failure = 0;
  int error = 0;
  int total = 0;
};

struct RunReport {
  std::vector<EntryResult> entries;
  // keyed by tag; the synthetic tag "all" covers every entry
  std::map<std::string, TagCounts> aggregates;
};

struct CorpusOptions {
  integrator::IntegratorConfig config{};
  std::uint64_t seed = 0;        // global seed, mixed with each entry id
  double timeout_seconds = 10.0; // per-entry budget; <= 0 disables
  int jobs = 1;
};

// Seed used for one entry: deterministic mix of the global seed and the
// entry id, so reordering or parallelising the corpus never changes results.
std::uint64_t entry_seed(std::uint64_t global_seed, const std::string& id);

RunReport run_corpus(const std::vector<CorpusEntry>& entries,
                     const CorpusOptions& opts);

// include_timing=false drops wall-clock fields so reports from identical
// seeded runs compare byte-for-byte.
std::string report_json(const RunReport& report, bool include_timing = true);
std::string report_table(const RunReport& report);

}  // namespace symnum::corpus

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "agdb/engine.hpp"
#include "agdb/model.hpp"
#include "agdb/plan.hpp"
#include "agdb/table_store.hpp"

namespace agdb::bench {

/// Seeded generator: raw std::mt19937_64 output with hand-written mappings,
/// so a seed gives the same stream on every platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Knuth's multiplication method.
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

struct LabelWeight {
  std::string label;
  double weight;
};

struct CorpusSpec {
  std::uint64_t seed = 42;
  std::size_t num_ags = 168;
  double words_per_ag = 14553.0 / 1680.0;
  double phones_per_word = 64145.0 / 14553.0;
  std::vector<std::string> word_labels;
  /// Explicit weights; any phone not listed shares the remaining mass.
  std::vector<LabelWeight> phone_weights;
  std::vector<std::string> phone_labels;
  std::string agset_id = "TIMIT";
};

/// Default alphabets; num_ags = round(1680 * scale).
CorpusSpec timit_like(double scale, std::uint64_t seed);

/// Each AG: one txt arc over the whole utterance, a chain of wrd arcs, and
/// under each word a chain of phn arcs sharing its boundary anchors. Word
/// and phone counts are 1 + Poisson(mean - 1).
AGSet generate_corpus(const CorpusSpec& spec);

inline constexpr const char* kQueries[4] = {
    "SELECT I WHERE X.[id:I].Y <- db/wrd AND X.[:hv].[]*.[:dcl].[]*.Y <- db/phn;",
    "SELECT I WHERE X.[id:I].Y <- db/wrd AND X.[:hv].[]*.Y <- db/phn;",
    "SELECT I WHERE X.[id:I].Y <- db/wrd AND X.[:hv].[]*.[:ix].Y <- db/phn;",
    "SELECT I WHERE X.[id:I].Y <- db/wrd AND X.[]*.[:dcl].[]*.Y <- db/phn;",
};

/// "X.[:l1].[]*. ... .[:ln].[]*.Y" joined with the word arc X..Y.
std::string long_join_query(const std::vector<std::string>& labels);

/// Stores the corpus and builds K* and K*-array for wrd, phn and phn/wrd.
void prepare_store(TableStore& store, const AGSet& agset);

struct Timing {
  int query;
  QueryMode mode;
  std::optional<std::string> domain;
  std::vector<double> runs;  // seconds
  double median = 0;
  std::size_t cardinality = 0;
};

struct IndexSize {
  std::string kind;
  std::string tag;
  std::size_t count;
};

struct LongJoinCell {
  std::optional<double> median;  // absent on timeout
  bool timed_out = false;
};

struct LongJoinRow {
  std::size_t n;
  std::vector<std::string> labels;
  std::size_t cardinality = 0;
  LongJoinCell kstar;
  LongJoinCell kstar_array;
};

struct CorpusSummary {
  std::size_t ags = 0, anchors = 0, txt = 0, wrd = 0, phn = 0;
};

struct BenchReport {
  CorpusSummary corpus;
  std::vector<IndexSize> index_sizes;
  std::size_t matrix_count = 0;
  std::vector<Timing> timings;
  std::vector<LongJoinRow> long_joins;
  std::string environment;
};

struct BenchOptions {
  int warmups = 1;
  int runs = 5;
  std::chrono::duration<double> long_join_budget{10.0};
};

CorpusSummary summarize(const AGSet& agset);

/// Times queries 1-4 in {kstar, kstar-array} x {phn, phn/wrd} after checking
/// each answer against oracle_match. Throws OracleMismatch on disagreement.
BenchReport run_benchmarks(const AGSet& agset, const TableStore& store, const BenchOptions& options = {});

/// Labels for the long-join pattern of length n: the first n phones of the
/// first word (corpus order) with at least `max_n` phones, or failing that
/// at least n phones. Empty if no word is long enough.
std::vector<std::string> long_join_labels(const AGSet& agset, std::size_t n, std::size_t max_n);

/// For n = 1..max_n times the long-join pattern in both modes. A cell that
/// exceeds the budget is recorded as a timeout.
std::vector<LongJoinRow> run_long_joins(const AGSet& agset, const TableStore& store, std::size_t max_n,
                                        const BenchOptions& options = {});

std::string to_json(const BenchReport& report);
std::string to_table(const BenchReport& report);

}  // namespace agdb::bench

#include "agdb/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include "json.hpp"
#include <thread>

#include "agdb/closure.hpp"
#include "agdb/error.hpp"
#include "agdb/relstore.hpp"

namespace agdb::bench {

Prng::Prng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Prng::next() { return engine_(); }

double Prng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Prng::below(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection keeps the mapping unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = next();
  while (x >= limit);
  return x % n;
}

std::uint64_t Prng::poisson(double mean) {
  if (mean <= 0) return 0;
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

CorpusSpec timit_like(double scale, std::uint64_t seed) {
  CorpusSpec spec;
  spec.seed = seed;
  spec.num_ags = static_cast<std::size_t>(std::llround(1680.0 * scale));
  spec.word_labels = {"she",  "had",   "your", "dark",  "suit",  "in",   "greasy", "wash",
                      "water", "all",  "year", "don't", "ask",   "me",   "to",     "carry",
                      "an",    "oily", "rag",  "like",  "that",  "the",  "of",     "and",
                      "a",     "is",   "was",  "he",    "for",   "it",   "with",   "as"};
  spec.phone_weights = {{"hv", 0.03}, {"dcl", 0.05}, {"ix", 0.06}};
  spec.phone_labels = {"aa", "ae", "ah",  "ao", "aw", "ax",  "ay", "b",  "bcl", "ch", "d",  "dh",
                       "dx", "eh", "el",  "en", "er", "ey",  "f",  "g",  "gcl", "hh", "ih", "iy",
                       "jh", "k",  "kcl", "l",  "m",  "n",   "ng", "ow", "oy",  "p",  "pcl", "q",
                       "r",  "s",  "sh",  "t",  "tcl", "th", "uh", "uw", "ux",  "v",  "w",  "y",
                       "z",  "zh", "epi", "pau", "h#"};
  return spec;
}

namespace {

class PhoneSampler {
 public:
  explicit PhoneSampler(const CorpusSpec& spec) {
    double fixed = 0;
    for (const auto& w : spec.phone_weights) {
      labels_.push_back(w.label);
      cumulative_.push_back(fixed += w.weight);
    }
    std::vector<std::string> rest;
    for (const auto& l : spec.phone_labels)
      if (std::none_of(spec.phone_weights.begin(), spec.phone_weights.end(),
                       [&](const LabelWeight& w) { return w.label == l; }))
        rest.push_back(l);
    const double share = rest.empty() ? 0 : (1.0 - fixed) / static_cast<double>(rest.size());
    double acc = fixed;
    for (const auto& l : rest) {
      labels_.push_back(l);
      cumulative_.push_back(acc += share);
    }
  }

  const std::string& draw(Prng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto i = static_cast<std::size_t>(it - cumulative_.begin());
    return labels_[std::min(i, labels_.size() - 1)];
  }

 private:
  std::vector<std::string> labels_;
  std::vector<double> cumulative_;
};

std::string ag_name(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "ag%04zu", k);
  return buf;
}

}  // namespace

AGSet generate_corpus(const CorpusSpec& spec) {
  AGSet set;
  set.id = spec.agset_id;
  set.version = "1.0";
  if (spec.num_ags == 0) return set;

  Prng rng(spec.seed);
  PhoneSampler phones(spec);
  const std::vector<std::string> fallback_words{"word"};
  const auto& words = spec.word_labels.empty() ? fallback_words : spec.word_labels;

  for (std::size_t k = 1; k <= spec.num_ags; ++k) {
    const auto prefix = ag_name(k);
    Timeline tl;
    tl.id = prefix + ".tl";
    tl.agset_id = set.id;
    Signal sig;
    sig.id = prefix + ".wav";
    sig.timeline_id = tl.id;
    sig.mimeclass = "audio";
    sig.mimetype = "wav";
    sig.encoding = "pcm";
    sig.unit = "sample";
    tl.signals.push_back(sig);
    set.timelines.push_back(std::move(tl));

    AG ag;
    ag.id = prefix;
    ag.agset_id = set.id;
    ag.timeline_id = prefix + ".tl";
    ag.type = "utterance";

    std::size_t anchors = 0;
    double offset = 0;
    auto new_anchor = [&]() {
      auto id = prefix + ".a" + std::to_string(anchors++);
      add_anchor(ag, id, offset, "sample", {sig.id});
      return id;
    };

    const auto first = new_anchor();
    auto word_start = first;
    const auto num_words = 1 + rng.poisson(spec.words_per_ag - 1);
    std::size_t phone_no = 0;
    std::vector<std::string> sentence;
    std::vector<Annotation> word_arcs, phone_arcs;
    for (std::uint64_t w = 1; w <= num_words; ++w) {
      const auto num_phones = 1 + rng.poisson(spec.phones_per_word - 1);
      auto phone_start = word_start;
      for (std::uint64_t p = 1; p <= num_phones; ++p) {
        offset += static_cast<double>(200 + rng.below(1800));
        auto end = new_anchor();
        phone_arcs.push_back(Annotation{prefix + ".p" + std::to_string(++phone_no), ag.id, phone_start, end, "phn",
                                        {{"label", phones.draw(rng)}}});
        phone_start = end;
      }
      const auto& label = words[rng.below(words.size())];
      sentence.push_back(label);
      word_arcs.push_back(Annotation{prefix + ".w" + std::to_string(w), ag.id, word_start, phone_start, "wrd",
                                     {{"label", label}}});
      word_start = phone_start;
    }
    std::string text;
    for (const auto& s : sentence) text += (text.empty() ? "" : " ") + s;
    ag.annotations.push_back(Annotation{prefix + ".txt", ag.id, first, word_start, "txt", {{"label", text}}});
    for (auto& a : word_arcs) ag.annotations.push_back(std::move(a));
    for (auto& a : phone_arcs) ag.annotations.push_back(std::move(a));
    set.ags.push_back(std::move(ag));
  }
  return set;
}

std::string long_join_query(const std::vector<std::string>& labels) {
  std::string q = "SELECT I WHERE X.[id:I].Y <- db/wrd AND X";
  for (const auto& l : labels) {
    q += ".[:'";
    for (char c : l) {
      if (c == '\'' || c == '\\') q += '\\';
      q += c;
    }
    q += "'].[]*";
  }
  q += ".Y <- db/phn;";
  return q;
}

void prepare_store(TableStore& store, const AGSet& agset) {
  store_agset(store, agset);
  for (auto kind : {IndexKind::kstar, IndexKind::kstar_array}) {
    build_index(store, kind, "wrd", std::nullopt);
    build_index(store, kind, "phn", std::nullopt);
    build_index(store, kind, "phn", std::string("wrd"));
  }
}

CorpusSummary summarize(const AGSet& agset) {
  CorpusSummary s;
  s.ags = agset.ags.size();
  for (const auto& ag : agset.ags) {
    s.anchors += ag.anchors.size();
    for (const auto& a : ag.annotations) {
      if (a.type == "txt") ++s.txt;
      if (a.type == "wrd") ++s.wrd;
      if (a.type == "phn") ++s.phn;
    }
  }
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::string environment_notes() {
  std::string env = "compiler ";
#if defined(__clang__)
  env += "clang " __clang_version__;
#elif defined(__GNUC__)
  env += "gcc " __VERSION__;
#else
  env += "unknown";
#endif
  env += "; hardware threads " + std::to_string(std::thread::hardware_concurrency());
  env += "; single-threaded measurement; steady_clock";
  return env;
}

std::string describe(const ResultSet& r) {
  return std::to_string(r.rows.size()) + " rows";
}

}  // namespace

BenchReport run_benchmarks(const AGSet& agset, const TableStore& store, const BenchOptions& options) {
  BenchReport report;
  report.corpus = summarize(agset);
  report.environment = environment_notes();

  Snapshot snap(store);
  for (auto [kind, tag] : snap.catalog().indexes) {
    IndexSize size{std::string(to_string(kind)), tag, 0};
    auto id = snap.lookup(tag);
    if (id) size.count = kind == IndexKind::kstar ? snap.kstar(*id).size() : snap.matrices(*id).size();
    if (kind == IndexKind::kstar_array) report.matrix_count += size.count;
    report.index_sizes.push_back(size);
  }

  const std::optional<std::string> domains[] = {std::nullopt, std::string("wrd")};
  for (int q = 1; q <= 4; ++q) {
    auto ast = agql::parse(kQueries[q - 1]);
    for (const auto& domain : domains) {
      auto expected = oracle_match(ast, agset, domain);
      for (auto mode : {QueryMode::kstar, QueryMode::kstar_array}) {
        auto plan = compile(ast, CompileOptions{mode, domain, agset.id}, &snap.catalog());
        Timing t{q, mode, domain, {}, 0, 0};
        for (int i = 0; i < options.warmups + options.runs; ++i) {
          auto start = Clock::now();
          auto got = execute(plan, snap);
          std::chrono::duration<double> took = Clock::now() - start;
          if (got != expected)
            throw Error(ErrorCode::OracleMismatch, "query " + std::to_string(q) + " " +
                                                       std::string(to_string(mode)) + " " +
                                                       closure_tag("phn", domain) + ": engine " + describe(got) +
                                                       ", oracle " + describe(expected));
          if (i >= options.warmups) t.runs.push_back(took.count());
        }
        t.median = median(t.runs);
        t.cardinality = expected.rows.size();
        report.timings.push_back(std::move(t));
      }
    }
  }
  return report;
}

std::vector<std::string> long_join_labels(const AGSet& agset, std::size_t n, std::size_t max_n) {
  for (auto want : {std::max(n, max_n), n}) {
    for (const auto& ag : agset.ags) {
      std::map<std::string, const Annotation*> phone_at;
      for (const auto& a : ag.annotations)
        if (a.type == "phn") phone_at.emplace(a.start_anchor, &a);
      for (const auto& w : ag.annotations) {
        if (w.type != "wrd") continue;
        std::vector<std::string> labels;
        auto at = w.start_anchor;
        while (at != w.end_anchor) {
          auto it = phone_at.find(at);
          if (it == phone_at.end()) break;
          auto label = it->second->features.find("label");
          labels.push_back(label == it->second->features.end() ? "" : label->second);
          at = it->second->end_anchor;
        }
        if (labels.size() >= want) {
          labels.resize(n);
          return labels;
        }
      }
    }
  }
  return {};
}

std::vector<LongJoinRow> run_long_joins(const AGSet& agset, const TableStore& store, std::size_t max_n,
                                        const BenchOptions& options) {
  Snapshot snap(store);
  std::vector<LongJoinRow> rows;
  std::vector<ResultSet> expected;
  std::vector<agql::QueryAst> asts;
  for (std::size_t n = 1; n <= max_n; ++n) {
    LongJoinRow row;
    row.n = n;
    row.labels = long_join_labels(agset, n, max_n);
    if (row.labels.empty()) continue;
    asts.push_back(agql::parse(long_join_query(row.labels)));
    expected.push_back(oracle_match(asts.back(), agset));
    row.cardinality = expected.back().rows.size();
    rows.push_back(std::move(row));
  }

  // Rounds go across all n so slow stretches of the machine hit every n alike.
  for (auto mode : {QueryMode::kstar, QueryMode::kstar_array}) {
    auto cell_of = [&](LongJoinRow& row) -> LongJoinCell& {
      return mode == QueryMode::kstar ? row.kstar : row.kstar_array;
    };
    std::vector<Plan> plans;
    for (const auto& ast : asts) plans.push_back(compile(ast, CompileOptions{mode, std::nullopt, agset.id}, &snap.catalog()));
    std::vector<std::vector<double>> runs(rows.size());
    for (int round = 0; round < options.warmups + options.runs; ++round) {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (cell_of(rows[k]).timed_out) continue;
        auto start = Clock::now();
        ExecuteOptions exec{start + std::chrono::duration_cast<Clock::duration>(options.long_join_budget)};
        try {
          auto got = execute(plans[k], snap, exec);
          std::chrono::duration<double> took = Clock::now() - start;
          if (got != expected[k])
            throw Error(ErrorCode::OracleMismatch, "long join n=" + std::to_string(rows[k].n) + " " +
                                                       std::string(to_string(mode)) + ": engine " + describe(got) +
                                                       ", oracle " + describe(expected[k]));
          if (round >= options.warmups) runs[k].push_back(took.count());
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Timeout) throw;
          cell_of(rows[k]).timed_out = true;
        }
      }
    }
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (!cell_of(rows[k]).timed_out && !runs[k].empty()) cell_of(rows[k]).median = median(runs[k]);
  }
  return rows;
}

namespace {

nlohmann::json cell_json(const LongJoinCell& c) {
  nlohmann::json j;
  j["median_seconds"] = c.median ? nlohmann::json(*c.median) : nlohmann::json(nullptr);
  j["timeout"] = c.timed_out;
  return j;
}

}  // namespace

std::string to_json(const BenchReport& report) {
  nlohmann::json j;
  j["corpus"] = {{"ags", report.corpus.ags},
                 {"anchors", report.corpus.anchors},
                 {"txt", report.corpus.txt},
                 {"wrd", report.corpus.wrd},
                 {"phn", report.corpus.phn}};
  j["index_sizes"] = nlohmann::json::array();
  for (const auto& s : report.index_sizes)
    j["index_sizes"].push_back({{"kind", s.kind}, {"type", s.tag}, {"count", s.count}});
  j["matrix_count"] = report.matrix_count;
  j["timings"] = nlohmann::json::array();
  for (const auto& t : report.timings)
    j["timings"].push_back({{"query", t.query},
                            {"mode", std::string(to_string(t.mode))},
                            {"type", closure_tag("phn", t.domain)},
                            {"runs_seconds", t.runs},
                            {"median_seconds", t.median},
                            {"cardinality", t.cardinality}});
  j["long_joins"] = nlohmann::json::array();
  for (const auto& r : report.long_joins)
    j["long_joins"].push_back({{"n", r.n},
                               {"labels", r.labels},
                               {"cardinality", r.cardinality},
                               {"kstar", cell_json(r.kstar)},
                               {"kstar_array", cell_json(r.kstar_array)}});
  j["environment"] = report.environment;
  return j.dump(2) + "\n";
}

std::string to_table(const BenchReport& report) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "corpus: %zu AGs, %zu anchors, txt %zu, wrd %zu, phn %zu\n", report.corpus.ags,
                report.corpus.anchors, report.corpus.txt, report.corpus.wrd, report.corpus.phn);
  out += buf;
  out += "\nindex sizes\n";
  for (const auto& s : report.index_sizes) {
    std::snprintf(buf, sizeof buf, "  %-12s %-8s %10zu\n", s.kind.c_str(), s.tag.c_str(), s.count);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "  matrices total %zu\n", report.matrix_count);
  out += buf;

  out += "\nmedian seconds      K* phn   K* phn/wrd  array phn  array phn/wrd   rows\n";
  for (int q = 1; q <= 4; ++q) {
    double cells[4] = {0, 0, 0, 0};
    std::size_t rows = 0;
    for (const auto& t : report.timings) {
      if (t.query != q) continue;
      int col = (t.mode == QueryMode::kstar ? 0 : 2) + (t.domain ? 1 : 0);
      cells[col] = t.median;
      rows = t.cardinality;
    }
    std::snprintf(buf, sizeof buf, "  query %d      %10.5f  %10.5f  %10.5f  %10.5f  %6zu\n", q, cells[0], cells[1],
                  cells[2], cells[3], rows);
    out += buf;
  }
  if (!report.long_joins.empty()) {
    out += "\nlong joins (n)      K*           array        rows\n";
    for (const auto& r : report.long_joins) {
      auto fmt = [](const LongJoinCell& c) {
        char b[32];
        if (c.timed_out) return std::string("timeout");
        std::snprintf(b, sizeof b, "%.5f", c.median.value_or(0));
        return std::string(b);
      };
      std::snprintf(buf, sizeof buf, "  %2zu            %-12s %-12s %6zu\n", r.n, fmt(r.kstar).c_str(),
                    fmt(r.kstar_array).c_str(), r.cardinality);
      out += buf;
    }
  }
  return out;
}

}  // namespace agdb::bench

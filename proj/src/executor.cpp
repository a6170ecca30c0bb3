#include <algorithm>
#include <unordered_map>

#include "agdb/engine.hpp"
#include "agdb/error.hpp"

namespace agdb {

namespace {

using Id = Snapshot::Id;

// Rows of a relation stored flat, `width` values per row.
struct Relation {
  std::size_t width = 0;
  std::vector<Id> values;

  std::size_t size() const { return width ? values.size() / width : 0; }
  const Id* row(std::size_t i) const { return values.data() + i * width; }
};

class Deadline {
 public:
  explicit Deadline(const ExecuteOptions& options) : at_(options.deadline) {}
  void tick() {
    if (!at_ || ++ticks_ % 4096) return;
    if (std::chrono::steady_clock::now() > *at_) throw Error(ErrorCode::Timeout, "query exceeded its time budget");
  }

 private:
  std::optional<std::chrono::steady_clock::time_point> at_;
  std::size_t ticks_ = 0;
};

class Executor {
 public:
  Executor(const Plan& plan, const Snapshot& snap, const ExecuteOptions& options)
      : plan_(plan), snap_(snap), deadline_(options) {}

  ResultSet run() {
    ResultSet out;
    for (const auto& o : plan_.projection) out.columns.push_back(o.variable);

    std::vector<bool> applied(plan_.predicates.size(), false);
    bool first = true;
    for (auto s : plan_.join_order) {
      auto rel = scan(s);
      if (first) {
        current_ = std::move(rel);
        for (std::size_t c = 0; c < plan_.sources[s].columns.size(); ++c)
          slots_[{s, plan_.sources[s].columns[c]}] = c;
        first = false;
      } else {
        join(s, std::move(rel), applied);
      }
      joined_.push_back(s);
      filter_ready(applied);
      if (current_.size() == 0) break;
    }
    if (plan_.join_order.empty()) return out;

    std::vector<std::vector<Id>> rows;
    if (current_.size() > 0) {
      std::vector<std::size_t> cols;
      for (const auto& o : plan_.projection) cols.push_back(slot(o.column));
      for (std::size_t i = 0; i < current_.size(); ++i) {
        deadline_.tick();
        std::vector<Id> r;
        for (auto c : cols) r.push_back(current_.row(i)[c]);
        rows.push_back(std::move(r));
      }
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    }
    for (const auto& r : rows) {
      std::vector<std::string> text;
      for (auto v : r) text.push_back(snap_.text(v));
      out.rows.push_back(std::move(text));
    }
    std::sort(out.rows.begin(), out.rows.end());
    return out;
  }

 private:
  struct SlotKey {
    std::size_t source;
    Col column;
    bool operator<(const SlotKey& o) const {
      return source != o.source ? source < o.source : column < o.column;
    }
  };

  std::size_t slot(const ColumnRef& ref) const { return slots_.at({ref.source, ref.column}); }
  bool bound(const ColumnRef& ref) const { return slots_.count({ref.source, ref.column}) != 0; }

  Relation scan(std::size_t s) {
    const auto& src = plan_.sources[s];
    Relation rel;
    rel.width = src.columns.size();
    auto emit = [&](auto&& value_of) {
      deadline_.tick();
      for (auto c : src.columns) rel.values.push_back(value_of(c));
    };

    switch (src.role) {
      case SourceRole::word_arc:
      case SourceRole::constrained_arc: {
        auto type = snap_.lookup(src.type);
        if (!type) break;
        std::optional<Id> agset;
        if (src.agset) {
          agset = snap_.lookup(*src.agset);
          if (!agset) break;
        }
        const Snapshot::FeatureTable* features = nullptr;
        std::vector<std::pair<std::size_t, Id>> wanted;
        if (src.role == SourceRole::constrained_arc) {
          features = snap_.feature_table(src.corpus);
          if (!features) throw Error(ErrorCode::UnknownCorpus, src.corpus);
          for (const auto& f : src.filters) {
            auto col = std::find(features->columns.begin(), features->columns.end(), f.column);
            if (col == features->columns.end()) throw Error(ErrorCode::UnknownFeature, src.corpus + "." + f.column);
            auto value = snap_.lookup(f.value);
            if (!value) return rel;
            wanted.emplace_back(static_cast<std::size_t>(col - features->columns.begin()), *value);
          }
        }
        for (auto idx : snap_.annotations_of_type(*type)) {
          const auto& a = snap_.annotations()[idx];
          if (agset && a.agset != *agset) continue;
          if (features) {
            auto row = features->rows.find(a.id);
            if (row == features->rows.end()) continue;
            bool ok = std::all_of(wanted.begin(), wanted.end(),
                                  [&](const auto& w) { return row->second[w.first] == w.second; });
            if (!ok) continue;
          }
          emit([&](Col c) {
            switch (c) {
              case Col::annotation_id: return a.id;
              case Col::start_anchor: return a.start;
              case Col::end_anchor: return a.end;
              case Col::ag_id: return a.ag;
              default: throw Error(ErrorCode::StorageFailure, "annotation source has no column A/AnchorId");
            }
          });
        }
        break;
      }
      case SourceRole::kstar_ref: {
        auto tag = snap_.lookup(src.type);
        if (!tag) break;
        for (const auto& [from, to] : snap_.kstar(*tag))
          emit([&](Col c) {
            if (c == Col::start_anchor) return from;
            if (c == Col::end_anchor) return to;
            throw Error(ErrorCode::StorageFailure, "kstar source has no such column");
          });
        break;
      }
      case SourceRole::kstar_array_ref: {
        auto tag = snap_.lookup(src.type);
        if (!tag) break;
        for (const auto& [ag, m] : snap_.matrices(*tag)) emit([&](Col) { return ag; });
        break;
      }
      case SourceRole::anchor_ref: {
        for (const auto& a : snap_.anchors())
          emit([&](Col c) {
            if (c == Col::anchor_id) return a.id;
            if (c == Col::ag_id) return a.ag;
            throw Error(ErrorCode::StorageFailure, "anchor source has no such column");
          });
        break;
      }
    }
    return rel;
  }

  // Hash join of current_ with `rel` on every equality linking source `s` to
  // an already joined source.
  void join(std::size_t s, Relation rel, std::vector<bool>& applied) {
    const auto& src = plan_.sources[s];
    auto local = [&](Col c) {
      return static_cast<std::size_t>(std::find(src.columns.begin(), src.columns.end(), c) - src.columns.begin());
    };

    // Equalities within the new source act as a filter.
    for (std::size_t p = 0; p < plan_.predicates.size(); ++p) {
      const auto& pred = plan_.predicates[p];
      if (pred.kind == PredicateKind::cell || pred.lhs.source != s || pred.rhs.source != s) continue;
      auto a = local(pred.lhs.column), b = local(pred.rhs.column);
      Relation kept{rel.width, {}};
      for (std::size_t i = 0; i < rel.size(); ++i)
        if (rel.row(i)[a] == rel.row(i)[b]) kept.values.insert(kept.values.end(), rel.row(i), rel.row(i) + rel.width);
      rel = std::move(kept);
      applied[p] = true;
    }

    std::vector<std::size_t> probe_cols, build_cols;
    for (std::size_t p = 0; p < plan_.predicates.size(); ++p) {
      const auto& pred = plan_.predicates[p];
      if (pred.kind == PredicateKind::cell || applied[p]) continue;
      if (pred.lhs.source == s && bound(pred.rhs)) {
        build_cols.push_back(local(pred.lhs.column));
        probe_cols.push_back(slot(pred.rhs));
      } else if (pred.rhs.source == s && bound(pred.lhs)) {
        build_cols.push_back(local(pred.rhs.column));
        probe_cols.push_back(slot(pred.lhs));
      } else {
        continue;
      }
      applied[p] = true;
    }

    Relation out;
    out.width = current_.width + rel.width;
    auto append = [&](const Id* left, const Id* right) {
      deadline_.tick();
      out.values.insert(out.values.end(), left, left + current_.width);
      out.values.insert(out.values.end(), right, right + rel.width);
    };

    if (build_cols.empty()) {
      for (std::size_t i = 0; i < current_.size(); ++i)
        for (std::size_t j = 0; j < rel.size(); ++j) append(current_.row(i), rel.row(j));
    } else {
      auto hash_of = [&](const Id* row, const std::vector<std::size_t>& cols) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto c : cols) h = (h ^ row[c]) * 0x100000001b3ULL;
        return h;
      };
      std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> table;
      table.reserve(rel.size());
      for (std::size_t j = 0; j < rel.size(); ++j) {
        deadline_.tick();
        table[hash_of(rel.row(j), build_cols)].push_back(static_cast<std::uint32_t>(j));
      }
      for (std::size_t i = 0; i < current_.size(); ++i) {
        const Id* left = current_.row(i);
        auto it = table.find(hash_of(left, probe_cols));
        if (it == table.end()) continue;
        for (auto j : it->second) {
          const Id* right = rel.row(j);
          bool same = true;
          for (std::size_t k = 0; k < build_cols.size() && same; ++k)
            same = left[probe_cols[k]] == right[build_cols[k]];
          if (same) append(left, right);
        }
      }
    }

    const auto base = current_.width;
    for (std::size_t c = 0; c < src.columns.size(); ++c) slots_[{s, src.columns[c]}] = base + c;
    current_ = std::move(out);
  }

  bool cell_holds(const Predicate& pred, const Id* row) const {
    const auto ag = row[slot({pred.matrix, Col::matrix})];
    const auto* m = snap_.matrix(*snap_.lookup(plan_.sources[pred.matrix].type), ag);
    if (!m) return false;
    const auto* from = snap_.anchor(row[slot(pred.lhs)]);
    const auto* to = snap_.anchor(row[slot(pred.rhs)]);
    if (!from || !to || from->ag != ag || to->ag != ag) return false;
    return m->test(from->number, to->number);
  }

  // Applies every predicate whose columns are now all available.
  void filter_ready(std::vector<bool>& applied) {
    std::vector<std::size_t> ready;
    for (std::size_t p = 0; p < plan_.predicates.size(); ++p) {
      const auto& pred = plan_.predicates[p];
      if (applied[p] || !bound(pred.lhs) || !bound(pred.rhs)) continue;
      if (pred.kind == PredicateKind::cell && !bound({pred.matrix, Col::matrix})) continue;
      ready.push_back(p);
      applied[p] = true;
    }
    if (ready.empty()) return;
    Relation kept{current_.width, {}};
    for (std::size_t i = 0; i < current_.size(); ++i) {
      deadline_.tick();
      const Id* row = current_.row(i);
      bool ok = std::all_of(ready.begin(), ready.end(), [&](std::size_t p) {
        const auto& pred = plan_.predicates[p];
        if (pred.kind == PredicateKind::cell) return cell_holds(pred, row);
        return row[slot(pred.lhs)] == row[slot(pred.rhs)];
      });
      if (ok) kept.values.insert(kept.values.end(), row, row + current_.width);
    }
    current_ = std::move(kept);
  }

  const Plan& plan_;
  const Snapshot& snap_;
  Deadline deadline_;
  Relation current_;
  std::map<SlotKey, std::size_t> slots_;
  std::vector<std::size_t> joined_;
};

}  // namespace

ResultSet execute(const Plan& plan, const Snapshot& snapshot, const ExecuteOptions& options) {
  return Executor(plan, snapshot, options).run();
}

ResultSet execute(const Plan& plan, const TableStore& store, const ExecuteOptions& options) {
  Snapshot snapshot(store);
  return execute(plan, snapshot, options);
}

ResultSet run_query(std::string_view query_text, const TableStore& store, const CompileOptions& options) {
  Snapshot snapshot(store);
  auto plan = compile(agql::parse(query_text), options, &snapshot.catalog());
  return execute(plan, snapshot);
}

}  // namespace agdb

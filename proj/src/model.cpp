#include "agdb/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "agdb/error.hpp"

namespace agdb {

const Anchor* AG::find_anchor(std::string_view anchor_id) const {
  auto it = std::find_if(anchors.begin(), anchors.end(),
                         [&](const Anchor& a) { return a.id == anchor_id; });
  return it == anchors.end() ? nullptr : &*it;
}

Anchor* AG::find_anchor(std::string_view anchor_id) {
  return const_cast<Anchor*>(std::as_const(*this).find_anchor(anchor_id));
}

const Annotation* AG::find_annotation(std::string_view annotation_id) const {
  auto it = std::find_if(annotations.begin(), annotations.end(),
                         [&](const Annotation& a) { return a.id == annotation_id; });
  return it == annotations.end() ? nullptr : &*it;
}

Annotation* AG::find_annotation(std::string_view annotation_id) {
  return const_cast<Annotation*>(std::as_const(*this).find_annotation(annotation_id));
}

const AG* AGSet::find_ag(std::string_view ag_id) const {
  auto it = std::find_if(ags.begin(), ags.end(), [&](const AG& g) { return g.id == ag_id; });
  return it == ags.end() ? nullptr : &*it;
}

AG* AGSet::find_ag(std::string_view ag_id) {
  return const_cast<AG*>(std::as_const(*this).find_ag(ag_id));
}

std::vector<std::string> AGSet::feature_names() const {
  std::set<std::string> names;
  for (const auto& ag : ags)
    for (const auto& ann : ag.annotations)
      for (const auto& [name, value] : ann.features) names.insert(name);
  return {names.begin(), names.end()};
}

Anchor& add_anchor(AG& ag, std::string id, std::optional<double> offset, std::string unit,
                   std::vector<std::string> signals) {
  if (ag.find_anchor(id) != nullptr) throw Error(ErrorCode::DuplicateId, "anchor " + id);
  ag.anchors.push_back(
      Anchor{std::move(id), ag.id, offset, std::move(unit), std::move(signals)});
  return ag.anchors.back();
}

namespace {

// True if `to` is reachable from `from` along annotations of any type.
bool reaches(const AG& ag, std::string_view from, std::string_view to) {
  std::unordered_map<std::string_view, std::vector<std::string_view>> succ;
  for (const auto& ann : ag.annotations) succ[ann.start_anchor].push_back(ann.end_anchor);
  std::unordered_set<std::string_view> seen{from};
  std::vector<std::string_view> stack{from};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (cur == to) return true;
    if (auto it = succ.find(cur); it != succ.end())
      for (auto next : it->second)
        if (seen.insert(next).second) stack.push_back(next);
  }
  return false;
}

}  // namespace

Annotation& add_annotation(AG& ag, std::string id, std::string_view start, std::string_view end,
                           std::string type, FeatureRecord features) {
  if (ag.find_anchor(start) == nullptr)
    throw Error(ErrorCode::UnknownAnchor, std::string(start));
  if (ag.find_anchor(end) == nullptr) throw Error(ErrorCode::UnknownAnchor, std::string(end));
  if (ag.find_annotation(id) != nullptr) throw Error(ErrorCode::DuplicateId, "annotation " + id);
  for (const auto& [name, value] : features)
    if (!is_valid_feature_name(name)) throw Error(ErrorCode::InvalidFeatureName, name);
  // A new arc start->end closes a cycle iff start is already reachable from end.
  if (reaches(ag, end, start))
    throw Error(ErrorCode::CycleDetected,
                "arc " + id + " (" + std::string(start) + " -> " + std::string(end) + ")");
  ag.annotations.push_back(Annotation{std::move(id), ag.id, std::string(start),
                                      std::string(end), std::move(type), std::move(features)});
  return ag.annotations.back();
}

bool is_valid_feature_name(std::string_view name) {
  return !name.empty() && name.find_first_of("\t\n") == std::string_view::npos;
}

void set_feature(Annotation& ann, std::string name, std::string value) {
  if (!is_valid_feature_name(name)) throw Error(ErrorCode::InvalidFeatureName, name);
  ann.features.insert_or_assign(std::move(name), std::move(value));
}

std::optional<std::vector<std::string>> topological_order(const AG& ag) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < ag.anchors.size(); ++i) index.emplace(ag.anchors[i].id, i);
  std::vector<std::vector<std::size_t>> succ(ag.anchors.size());
  std::vector<std::size_t> indegree(ag.anchors.size(), 0);
  for (const auto& ann : ag.annotations) {
    auto s = index.find(ann.start_anchor);
    auto e = index.find(ann.end_anchor);
    if (s == index.end() || e == index.end()) return std::nullopt;
    succ[s->second].push_back(e->second);
    ++indegree[e->second];
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < indegree.size(); ++i)
    if (indegree[i] == 0) ready.push_back(i);
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto cur = ready.front();
    ready.pop_front();
    order.push_back(ag.anchors[cur].id);
    for (auto next : succ[cur])
      if (--indegree[next] == 0) ready.push_back(next);
  }
  if (order.size() != ag.anchors.size()) return std::nullopt;
  return order;
}

std::vector<Violation> validate(const AGSet& agset) {
  std::vector<Violation> out;
  auto report = [&](const std::string& id, std::string rule, std::string message) {
    out.push_back(Violation{id, std::move(rule), std::move(message)});
  };

  if (agset.id.empty()) report(agset.id, "agset-id", "AGSet id is empty");

  std::set<std::string> owners{agset.id};
  std::set<std::string> timeline_ids;
  std::set<std::string> signal_ids;
  for (const auto& tl : agset.timelines) {
    if (!timeline_ids.insert(tl.id).second)
      report(tl.id, "timeline-unique", "duplicate timeline id " + tl.id);
    if (tl.agset_id != agset.id)
      report(tl.id, "owner-consistency", "timeline agset_id " + tl.agset_id + " != " + agset.id);
    owners.insert(tl.id);
    for (const auto& sig : tl.signals) {
      if (!signal_ids.insert(sig.id).second)
        report(sig.id, "signal-unique", "duplicate signal id " + sig.id);
      if (sig.timeline_id != tl.id)
        report(sig.id, "owner-consistency",
               "signal timeline_id " + sig.timeline_id + " != " + tl.id);
      owners.insert(sig.id);
    }
  }

  std::set<std::string> ag_ids;
  std::set<std::string> annotation_ids;
  for (const auto& ag : agset.ags) {
    if (!ag_ids.insert(ag.id).second) report(ag.id, "ag-unique", "duplicate AG id " + ag.id);
    owners.insert(ag.id);
    if (ag.agset_id != agset.id)
      report(ag.id, "owner-consistency", "AG agset_id " + ag.agset_id + " != " + agset.id);
    if (ag.timeline_id && timeline_ids.count(*ag.timeline_id) == 0)
      report(ag.id, "timeline-ref", "AG references unknown timeline " + *ag.timeline_id);

    std::unordered_map<std::string_view, const Anchor*> anchors;
    for (const auto& anchor : ag.anchors) {
      if (!anchors.emplace(anchor.id, &anchor).second)
        report(anchor.id, "anchor-unique", "duplicate anchor id " + anchor.id + " in " + ag.id);
      if (anchor.ag_id != ag.id)
        report(anchor.id, "owner-consistency", "anchor ag_id " + anchor.ag_id + " != " + ag.id);
      if (anchor.offset && !std::isfinite(*anchor.offset))
        report(anchor.id, "offset-finite", "anchor offset is not finite");
      for (const auto& sig : anchor.signal_ids)
        if (sig.empty() || sig.find(' ') != std::string::npos)
          report(anchor.id, "signal-ref", "signal id '" + sig + "' is empty or contains a space");
    }

    bool dangling = false;
    for (const auto& ann : ag.annotations) {
      if (!annotation_ids.insert(ann.id).second)
        report(ann.id, "annotation-unique", "duplicate annotation id " + ann.id);
      if (ann.ag_id != ag.id)
        report(ann.id, "owner-consistency", "annotation ag_id " + ann.ag_id + " != " + ag.id);
      for (const auto& [name, value] : ann.features)
        if (!is_valid_feature_name(name))
          report(ann.id, "feature-name", "invalid feature name '" + name + "'");
      auto s = anchors.find(ann.start_anchor);
      auto e = anchors.find(ann.end_anchor);
      if (s == anchors.end())
        report(ann.id, "anchor-ref", "start anchor " + ann.start_anchor + " does not exist");
      if (e == anchors.end())
        report(ann.id, "anchor-ref", "end anchor " + ann.end_anchor + " does not exist");
      if (s == anchors.end() || e == anchors.end()) {
        dangling = true;
        continue;
      }
      const auto& so = s->second->offset;
      const auto& eo = e->second->offset;
      if (so && eo && *so > *eo)
        report(ann.id, "offset-order",
               "offset(start) " + std::to_string(*so) + " > offset(end) " + std::to_string(*eo));
    }
    if (!dangling && !topological_order(ag))
      report(ag.id, "acyclic", "annotation graph " + ag.id + " contains a cycle");
  }

  std::set<std::pair<std::string, std::string>> md_keys;
  for (const auto& item : agset.metadata) {
    if (!md_keys.emplace(item.owner_id, item.name).second)
      report(item.owner_id, "metadata-unique", "duplicate metadata " + item.name);
    if (owners.count(item.owner_id) == 0)
      report(item.owner_id, "metadata-owner", "metadata owner does not exist");
  }
  return out;
}

}  // namespace agdb

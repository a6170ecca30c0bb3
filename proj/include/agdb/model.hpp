#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agdb {

/// Open-ended string fields attached to an annotation. Values are opaque.
using FeatureRecord = std::map<std::string, std::string>;

struct Anchor {
  std::string id;
  std::string ag_id;
  std::optional<double> offset;
  std::string unit;
  std::vector<std::string> signal_ids;

  bool operator==(const Anchor&) const = default;
};

struct Annotation {
  std::string id;
  std::string ag_id;
  std::string start_anchor;
  std::string end_anchor;
  std::string type;
  FeatureRecord features;

  bool operator==(const Annotation&) const = default;
};

struct Signal {
  std::string id;
  std::string timeline_id;
  std::string mimeclass;
  std::string mimetype;
  std::string encoding;
  std::string unit;
  std::string xlinktype;
  std::string xlinkhref;
  std::string track;

  bool operator==(const Signal&) const = default;
};

struct Timeline {
  std::string id;
  std::string agset_id;
  std::vector<Signal> signals;

  bool operator==(const Timeline&) const = default;
};

struct AG {
  std::string id;
  std::string agset_id;
  std::optional<std::string> timeline_id;
  std::optional<std::string> type;
  std::vector<Anchor> anchors;
  std::vector<Annotation> annotations;

  bool operator==(const AG&) const = default;

  const Anchor* find_anchor(std::string_view anchor_id) const;
  Anchor* find_anchor(std::string_view anchor_id);
  const Annotation* find_annotation(std::string_view annotation_id) const;
  Annotation* find_annotation(std::string_view annotation_id);
};

struct MetadataItem {
  std::string owner_id;
  std::string name;
  std::string value;

  bool operator==(const MetadataItem&) const = default;
};

struct AGSet {
  std::string id;
  std::string version;
  std::string xmlns;
  std::string xlink;
  std::vector<Timeline> timelines;
  std::vector<AG> ags;
  std::vector<MetadataItem> metadata;

  bool operator==(const AGSet&) const = default;

  const AG* find_ag(std::string_view ag_id) const;
  AG* find_ag(std::string_view ag_id);
  /// Distinct feature names used by any annotation, sorted.
  std::vector<std::string> feature_names() const;
};

// ---------------------------------------------------------------------------
// Mutation

/// Appends an anchor. Throws DuplicateId if the id is already used in `ag`.
Anchor& add_anchor(AG& ag, std::string id, std::optional<double> offset,
                   std::string unit = {}, std::vector<std::string> signals = {});

/// Appends an annotation after checking that both anchors exist, the id is
/// unused in `ag`, and the new arc does not close a cycle. On error the AG is
/// left untouched.
Annotation& add_annotation(AG& ag, std::string id, std::string_view start,
                           std::string_view end, std::string type,
                           FeatureRecord features = {});

bool is_valid_feature_name(std::string_view name);

/// Upserts one feature; throws InvalidFeatureName for empty names or names
/// containing tab or newline.
void set_feature(Annotation& ann, std::string name, std::string value);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string object_id;
  std::string rule;
  std::string message;

  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate(const AGSet& agset);

/// Kahn's algorithm over the AG's anchors; empty if the graph has a cycle or
/// references unknown anchors.
std::optional<std::vector<std::string>> topological_order(const AG& ag);

}  // namespace agdb

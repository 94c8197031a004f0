#pragma once

#include <Eigen/Core>

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace iamod {

/// Integer identifier tagged with the entity it names, so node and arc ids
/// cannot be mixed up.
template <typename Tag>
struct StrongId {
  std::int64_t value = 0;

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
};

using NodeId = StrongId<struct NodeTag>;
using ArcId = StrongId<struct ArcTag>;

enum class Layer : std::uint8_t { Walk, Bike, Car, PublicTransit, Origin, Destination };

inline constexpr std::array<Layer, 6> kAllLayers = {
    Layer::Walk, Layer::Bike, Layer::Car, Layer::PublicTransit, Layer::Origin, Layer::Destination};

std::string_view to_string(Layer layer);
std::optional<Layer> parse_layer(std::string_view text);

/// True iff a mode-switch arc may go from `tail` to `head`.
constexpr bool validate_switch_pair(Layer tail, Layer head) {
  using enum Layer;
  return (tail == Car && head == Destination) || (tail == Origin && head == Car) ||
         (tail == PublicTransit && head == Walk) || (tail == Walk && head == PublicTransit) ||
         (tail == Bike && head == Walk) || (tail == Origin && head == Walk) ||
         (tail == Walk && head == Destination) || (tail == Origin && head == Bike) ||
         (tail == Bike && head == Destination);
}

struct ArcKind {
  bool is_switch = false;
  Layer layer = Layer::Walk;  // meaningful only when !is_switch

  static constexpr ArcKind within(Layer l) { return {false, l}; }
  static constexpr ArcKind mode_switch() { return {true, Layer::Walk}; }

  friend constexpr bool operator==(const ArcKind& a, const ArcKind& b) {
    return a.is_switch == b.is_switch && (a.is_switch || a.layer == b.layer);
  }
};

struct Node {
  NodeId id;
  Layer layer = Layer::Walk;
  std::string label;
};

struct Arc {
  ArcId id;
  NodeId tail;
  NodeId head;
  double travel_time = 0.0;  // minutes
  ArcKind kind;
};

/// Time classes used for modal shares: the four moving layers plus switching.
enum class ModeClass : std::uint8_t { Walk, Bike, Car, PublicTransit, Switch };
inline constexpr std::size_t kNumModeClasses = 5;

std::string_view to_string(ModeClass mode);
ModeClass mode_class(const ArcKind& kind);

/// Layered digraph with per-arc travel times. Nodes and arcs are stored sorted
/// by id; their positions are the dense indices used for flow variables.
/// Immutable once built.
class IntermodalGraph {
 public:
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Arc> arcs() const { return arcs_; }
  const Node& node(std::size_t index) const { return nodes_[index]; }
  const Arc& arc(std::size_t index) const { return arcs_[index]; }

  std::optional<std::size_t> node_index(NodeId id) const;
  std::optional<std::size_t> arc_index(ArcId id) const;

  std::size_t tail(std::size_t arc) const { return ends_[arc].first; }
  std::size_t head(std::size_t arc) const { return ends_[arc].second; }

  std::span<const std::size_t> out_arcs(std::size_t node) const { return out_[node]; }
  std::span<const std::size_t> in_arcs(std::size_t node) const { return in_[node]; }

  /// Within-layer arc indices of `layer`, ascending by arc id.
  std::span<const std::size_t> layer_arcs(Layer layer) const {
    return layer_arcs_[static_cast<std::size_t>(layer)];
  }
  std::span<const std::size_t> switch_arcs() const { return switch_arcs_; }
  std::span<const std::size_t> layer_nodes(Layer layer) const {
    return layer_nodes_[static_cast<std::size_t>(layer)];
  }

  /// Travel time per arc index, minutes.
  const Eigen::VectorXd& travel_times() const { return travel_times_; }

 private:
  friend IntermodalGraph build_graph(std::vector<Node> nodes, std::vector<Arc> arcs);

  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<std::pair<std::size_t, std::size_t>> ends_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::array<std::vector<std::size_t>, 6> layer_arcs_;
  std::array<std::vector<std::size_t>, 6> layer_nodes_;
  std::vector<std::size_t> switch_arcs_;
  std::unordered_map<std::int64_t, std::size_t> node_lookup_;
  std::unordered_map<std::int64_t, std::size_t> arc_lookup_;
  Eigen::VectorXd travel_times_;
};

/// Validates and indexes a graph. Throws iamod::Error on DuplicateNodeId,
/// DuplicateArcId, DanglingArcEndpoint, SelfLoop, NegativeTravelTime,
/// InternalArcInTerminalLayer, ArcLayerMismatch or IllegalModeSwitch.
IntermodalGraph build_graph(std::vector<Node> nodes, std::vector<Arc> arcs);

/// Within-layer arcs of a layer, ordered by arc id.
std::vector<Arc> arcs_of_layer(const IntermodalGraph& graph, Layer layer);
std::vector<Arc> switch_arcs(const IntermodalGraph& graph);

std::string write_network_json(const IntermodalGraph& graph);
IntermodalGraph read_network_json(std::string_view text);
IntermodalGraph load_network(const std::string& path);

}  // namespace iamod

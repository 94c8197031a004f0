#include "iamod/network.hpp"

#include "iamod/error.hpp"
#include "text_io.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>

namespace iamod {

namespace {

constexpr std::array<std::string_view, 6> kLayerNames = {
    "walk", "bike", "car", "public_transit", "origin", "destination"};

bool is_terminal(Layer layer) { return layer == Layer::Origin || layer == Layer::Destination; }

}  // namespace

std::string_view to_string(Layer layer) { return kLayerNames[static_cast<std::size_t>(layer)]; }

std::optional<Layer> parse_layer(std::string_view text) {
  for (const auto layer : kAllLayers)
    if (to_string(layer) == text) return layer;
  return std::nullopt;
}

std::string_view to_string(ModeClass mode) {
  static constexpr std::array<std::string_view, kNumModeClasses> names = {
      "walk", "bike", "car", "public_transit", "switch"};
  return names[static_cast<std::size_t>(mode)];
}

ModeClass mode_class(const ArcKind& kind) {
  if (kind.is_switch) return ModeClass::Switch;
  return static_cast<ModeClass>(static_cast<std::uint8_t>(kind.layer));
}

std::optional<std::size_t> IntermodalGraph::node_index(NodeId id) const {
  const auto it = node_lookup_.find(id.value);
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> IntermodalGraph::arc_index(ArcId id) const {
  const auto it = arc_lookup_.find(id.value);
  if (it == arc_lookup_.end()) return std::nullopt;
  return it->second;
}

IntermodalGraph build_graph(std::vector<Node> nodes, std::vector<Arc> arcs) {
  IntermodalGraph g;
  std::ranges::sort(nodes, {}, &Node::id);
  std::ranges::sort(arcs, {}, &Arc::id);

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.value < 0)
      throw Error(ErrorCode::ParseError, fmt::format("node id {} is negative", nodes[i].id.value));
    if (!g.node_lookup_.emplace(nodes[i].id.value, i).second)
      throw Error(ErrorCode::DuplicateNodeId, fmt::format("node id {}", nodes[i].id.value));
  }

  g.ends_.reserve(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const Arc& arc = arcs[a];
    if (!g.arc_lookup_.emplace(arc.id.value, a).second)
      throw Error(ErrorCode::DuplicateArcId, fmt::format("arc id {}", arc.id.value));
    const auto tail = g.node_lookup_.find(arc.tail.value);
    const auto head = g.node_lookup_.find(arc.head.value);
    if (tail == g.node_lookup_.end() || head == g.node_lookup_.end())
      throw Error(ErrorCode::DanglingArcEndpoint,
                  fmt::format("arc {} ({} -> {})", arc.id.value, arc.tail.value, arc.head.value));
    if (tail->second == head->second)
      throw Error(ErrorCode::SelfLoop, fmt::format("arc {} at node {}", arc.id.value, arc.tail.value));
    if (!(arc.travel_time >= 0.0))
      throw Error(ErrorCode::NegativeTravelTime,
                  fmt::format("arc {} has travel time {}", arc.id.value, arc.travel_time));

    const Layer tl = nodes[tail->second].layer;
    const Layer hl = nodes[head->second].layer;
    if (arc.kind.is_switch) {
      if (!validate_switch_pair(tl, hl))
        throw Error(ErrorCode::IllegalModeSwitch,
                    fmt::format("arc {}: {} -> {}", arc.id.value, to_string(tl), to_string(hl)));
    } else {
      if (is_terminal(arc.kind.layer) || (tl == hl && is_terminal(tl)))
        throw Error(ErrorCode::InternalArcInTerminalLayer, fmt::format("arc {}", arc.id.value));
      if (tl != arc.kind.layer || hl != arc.kind.layer)
        throw Error(ErrorCode::ArcLayerMismatch,
                    fmt::format("arc {} declared {} but joins {} -> {}", arc.id.value,
                                to_string(arc.kind.layer), to_string(tl), to_string(hl)));
    }
    g.ends_.emplace_back(tail->second, head->second);
  }

  g.out_.resize(nodes.size());
  g.in_.resize(nodes.size());
  g.travel_times_.resize(static_cast<Eigen::Index>(arcs.size()));
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    g.out_[g.ends_[a].first].push_back(a);
    g.in_[g.ends_[a].second].push_back(a);
    g.travel_times_[static_cast<Eigen::Index>(a)] = arcs[a].travel_time;
    if (arcs[a].kind.is_switch)
      g.switch_arcs_.push_back(a);
    else
      g.layer_arcs_[static_cast<std::size_t>(arcs[a].kind.layer)].push_back(a);
  }
  for (std::size_t v = 0; v < nodes.size(); ++v)
    g.layer_nodes_[static_cast<std::size_t>(nodes[v].layer)].push_back(v);

  g.nodes_ = std::move(nodes);
  g.arcs_ = std::move(arcs);
  return g;
}

std::vector<Arc> arcs_of_layer(const IntermodalGraph& graph, Layer layer) {
  std::vector<Arc> out;
  for (const auto a : graph.layer_arcs(layer)) out.push_back(graph.arc(a));
  return out;
}

std::vector<Arc> switch_arcs(const IntermodalGraph& graph) {
  std::vector<Arc> out;
  for (const auto a : graph.switch_arcs()) out.push_back(graph.arc(a));
  return out;
}

// Schema:
// {
//   "nodes": [{"id": int, "layer": "walk|bike|car|public_transit|origin|destination", "label"?: str}],
//   "arcs":  [{"id": int, "tail": int, "head": int, "travel_time_min": num,
//              "kind": "switch" | <layer name>}]
// }
std::string write_network_json(const IntermodalGraph& graph) {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::ordered_json j;
    j["id"] = n.id.value;
    j["layer"] = to_string(n.layer);
    if (!n.label.empty()) j["label"] = n.label;
    doc["nodes"].push_back(std::move(j));
  }
  doc["arcs"] = nlohmann::ordered_json::array();
  for (const auto& a : graph.arcs()) {
    nlohmann::ordered_json j;
    j["id"] = a.id.value;
    j["tail"] = a.tail.value;
    j["head"] = a.head.value;
    j["travel_time_min"] = a.travel_time;
    j["kind"] = a.kind.is_switch ? std::string("switch") : std::string(to_string(a.kind.layer));
    doc["arcs"].push_back(std::move(j));
  }
  return doc.dump(1) + "\n";
}

IntermodalGraph read_network_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("network file: ") + e.what());
  }
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  try {
    for (const auto& j : doc.at("nodes")) {
      Node n;
      n.id = NodeId{j.at("id").get<std::int64_t>()};
      const auto layer = parse_layer(j.at("layer").get<std::string>());
      if (!layer)
        throw Error(ErrorCode::ParseError, "unknown layer '" + j.at("layer").get<std::string>() + "'");
      n.layer = *layer;
      if (j.contains("label")) n.label = j.at("label").get<std::string>();
      nodes.push_back(std::move(n));
    }
    for (const auto& j : doc.at("arcs")) {
      Arc a;
      a.id = ArcId{j.at("id").get<std::int64_t>()};
      a.tail = NodeId{j.at("tail").get<std::int64_t>()};
      a.head = NodeId{j.at("head").get<std::int64_t>()};
      a.travel_time = j.at("travel_time_min").get<double>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "switch") {
        a.kind = ArcKind::mode_switch();
      } else if (const auto layer = parse_layer(kind)) {
        a.kind = ArcKind::within(*layer);
      } else {
        throw Error(ErrorCode::ParseError, "unknown arc kind '" + kind + "'");
      }
      arcs.push_back(a);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("network file: ") + e.what());
  }
  return build_graph(std::move(nodes), std::move(arcs));
}

IntermodalGraph load_network(const std::string& path) {
  return read_network_json(detail::read_file(path));
}

}  // namespace iamod

#include "iamod/report.hpp"

#include "iamod/error.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace iamod {

const char* const kVersion = "0.1.0";

std::string_view to_string(HistogramBasis basis) {
  return basis == HistogramBasis::OdPair ? "od" : "path";
}

double ModalShareBin::total_mass() const {
  double s = 0.0;
  for (const double v : time_mass) s += v;
  return s;
}

double ModalShareBin::share(ModeClass mode) const {
  const double total = total_mass();
  return total == 0.0 ? 0.0 : time_mass[static_cast<std::size_t>(mode)] / total;
}

double ModalShareBin::average_time() const { return weight == 0.0 ? 0.0 : total_mass() / weight; }

namespace {

// Bins keyed by index floor(time / width); the small nudge keeps times that
// are integral multiples of the width (up to round-off) in the upper bin.
class Binner {
 public:
  explicit Binner(double width) : width_(width) {
    if (!(width > 0.0) || !std::isfinite(width))
      throw Error(ErrorCode::InvalidParameter, fmt::format("bin width must be positive, got {}", width));
  }

  ModalShareBin& at(double time) {
    const auto k = static_cast<long long>(std::floor(time / width_ + 1e-9));
    auto [it, inserted] = bins_.try_emplace(k);
    if (inserted) {
      it->second.lower = static_cast<double>(k) * width_;
      it->second.upper = static_cast<double>(k + 1) * width_;
    }
    return it->second;
  }

  std::vector<ModalShareBin> take() {
    std::vector<ModalShareBin> out;
    for (auto& [k, b] : bins_) out.push_back(b);
    return out;
  }

 private:
  double width_;
  std::map<long long, ModalShareBin> bins_;
};

long long bin_key(const ModalShareBin& b, double width) {
  const double k = b.lower / width;
  const auto r = std::llround(k);
  if (std::abs(k - static_cast<double>(r)) > 1e-9)
    throw Error(ErrorCode::BinMismatch, fmt::format("bin [{}, {}) is not aligned to width {}", b.lower, b.upper, width));
  return r;
}

double common_width(const std::vector<ModalShareBin>& bins) {
  if (bins.empty()) return 0.0;
  const double w = bins.front().upper - bins.front().lower;
  for (const auto& b : bins)
    if (std::abs((b.upper - b.lower) - w) > 1e-9 * std::max(1.0, w))
      throw Error(ErrorCode::BinMismatch, "bins of one histogram have different widths");
  return w;
}

}  // namespace

std::vector<ModalShareBin> modal_share_histogram(const FlowSolution& solution, double bin_width) {
  const auto& sc = *solution.scenario;
  if (sc.num_demands() == 0) throw Error(ErrorCode::EmptyInput, "solution has no demands");
  const auto& g = sc.graph;
  Binner binner(bin_width);
  for (std::size_t m = 0; m < sc.num_demands(); ++m) {
    std::array<double, kNumModeClasses> mass{};
    double total = 0.0;
    const auto col = solution.demand_flows.col(static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < g.num_arcs(); ++a) {
      const double v = g.arc(a).travel_time * col[static_cast<Eigen::Index>(a)];
      mass[static_cast<std::size_t>(mode_class(g.arc(a).kind))] += v;
      total += v;
    }
    const double alpha = sc.demands[m].rate;
    auto& bin = binner.at(total / alpha);
    bin.weight += alpha;
    for (std::size_t c = 0; c < kNumModeClasses; ++c) bin.time_mass[c] += mass[c];
  }
  return binner.take();
}

std::vector<ModalShareBin> modal_share_histogram(const std::vector<PathAllocation>& allocations,
                                                 const Scenario& scenario, double bin_width) {
  if (allocations.empty()) throw Error(ErrorCode::EmptyInput, "no path allocations");
  const auto& g = scenario.graph;
  Binner binner(bin_width);
  for (const auto& alloc : allocations) {
    const double alpha = scenario.demands[static_cast<std::size_t>(alloc.demand)].rate;
    for (std::size_t p = 0; p < alloc.paths.count(); ++p) {
      const double share = alloc.fractions[static_cast<Eigen::Index>(p)] * alloc.scale / alloc.rate;
      if (share <= 1e-12) continue;
      const double w = share * alpha;
      auto& bin = binner.at(alloc.paths.times[static_cast<Eigen::Index>(p)]);
      bin.weight += w;
      for (const auto a : alloc.paths.paths[p])
        bin.time_mass[static_cast<std::size_t>(mode_class(g.arc(a).kind))] += w * g.arc(a).travel_time;
    }
  }
  return binner.take();
}

std::vector<ModalShareBin> histogram_difference(const std::vector<ModalShareBin>& a,
                                                const std::vector<ModalShareBin>& b) {
  const double wa = common_width(a);
  const double wb = common_width(b);
  if (!a.empty() && !b.empty() && std::abs(wa - wb) > 1e-9 * std::max(1.0, wa))
    throw Error(ErrorCode::BinMismatch, fmt::format("bin widths differ: {} vs {}", wa, wb));
  const double w = a.empty() ? wb : wa;
  std::map<long long, ModalShareBin> out;
  auto accumulate = [&](const std::vector<ModalShareBin>& bins, double sign) {
    for (const auto& bin : bins) {
      auto [it, inserted] = out.try_emplace(bin_key(bin, w));
      if (inserted) {
        it->second.lower = bin.lower;
        it->second.upper = bin.upper;
      }
      it->second.weight += sign * bin.weight;
      for (std::size_t c = 0; c < kNumModeClasses; ++c) it->second.time_mass[c] += sign * bin.time_mass[c];
    }
  };
  accumulate(a, 1.0);
  accumulate(b, -1.0);
  std::vector<ModalShareBin> result;
  for (auto& [k, bin] : out) result.push_back(bin);
  return result;
}

std::string write_histogram_csv(const std::vector<ModalShareBin>& bins, std::string_view manifest_id) {
  std::string out = fmt::format("# iamod-histogram v1 manifest={}\n", manifest_id);
  out += "lower_min,upper_min,weight";
  for (std::size_t c = 0; c < kNumModeClasses; ++c)
    out += fmt::format(",{}_time", to_string(static_cast<ModeClass>(c)));
  for (std::size_t c = 0; c < kNumModeClasses; ++c)
    out += fmt::format(",{}_share", to_string(static_cast<ModeClass>(c)));
  out += '\n';
  for (const auto& b : bins) {
    out += fmt::format("{},{},{}", b.lower, b.upper, b.weight);
    for (const double v : b.time_mass) out += fmt::format(",{}", v);
    for (std::size_t c = 0; c < kNumModeClasses; ++c) out += fmt::format(",{}", b.share(static_cast<ModeClass>(c)));
    out += '\n';
  }
  return out;
}

std::string write_histogram_svg(const std::vector<ModalShareBin>& bins, std::string_view title,
                                std::string_view manifest_id) {
  constexpr double width = 720, height = 360, margin = 40;
  static constexpr std::array<const char*, kNumModeClasses> colors{"#4c9a2a", "#e0a100", "#c0392b", "#2c6fbb",
                                                                   "#888888"};
  double top = 0.0, bottom = 0.0;
  for (const auto& b : bins) {
    double pos = 0.0, neg = 0.0;
    for (const double v : b.time_mass) (v > 0 ? pos : neg) += v;
    top = std::max(top, pos);
    bottom = std::min(bottom, neg);
  }
  const double span = top - bottom > 0 ? top - bottom : 1.0;
  const double lo = bins.empty() ? 0.0 : bins.front().lower;
  const double hi = bins.empty() ? 1.0 : bins.back().upper;
  const double sx = (width - 2 * margin) / (hi - lo);
  const double sy = (height - 2 * margin) / span;
  const double axis = margin + top * sy;

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", width, height,
      width, height);
  out += fmt::format("<!-- iamod-histogram v1 manifest={} -->\n", manifest_id);
  out += fmt::format("<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", margin, title);
  for (const auto& b : bins) {
    const double x = margin + (b.lower - lo) * sx;
    const double w = (b.upper - b.lower) * sx * 0.9;
    double up = axis, down = axis;
    for (std::size_t c = 0; c < kNumModeClasses; ++c) {
      const double v = b.time_mass[c];
      if (v == 0.0) continue;
      const double h = std::abs(v) * sy;
      const double y = v > 0 ? (up -= h) : down;
      if (v < 0) down += h;
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y, w,
                         h, colors[c]);
    }
    out += fmt::format("<text x=\"{:.2f}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"9\">{}</text>\n", x,
                       height - margin / 2, b.lower);
  }
  out += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", margin, axis,
                     width - margin, axis);
  for (std::size_t c = 0; c < kNumModeClasses; ++c)
    out += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" fill=\"{}\">{}</text>\n",
        width - margin - 90, margin + 12.0 * static_cast<double>(c), colors[c], to_string(static_cast<ModeClass>(c)));
  out += "</svg>\n";
  return out;
}

std::vector<RegionRow> region_unfairness_table(const Scenario& scenario, const Eigen::VectorXd& excess) {
  const auto u = region_unfairness(scenario, excess);
  std::vector<RegionRow> rows;
  for (std::size_t r = 0; r < scenario.regions.size(); ++r)
    rows.push_back({scenario.regions[r].id, scenario.regions[r].population, u[static_cast<Eigen::Index>(r)]});
  return rows;
}

std::vector<RegionRow> region_unfairness_table(const FlowSolution& solution) {
  return region_unfairness_table(*solution.scenario, solution.slacks);
}

std::string write_region_table_csv(const std::vector<RegionRow>& rows, std::string_view manifest_id) {
  std::string out = fmt::format("# iamod-regions v1 manifest={}\n", manifest_id);
  out += "region_id,population,u_r_min\n";
  for (const auto& r : rows) out += fmt::format("{},{},{}\n", r.region.value, r.population, r.unfairness);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Internal, "sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string RunManifest::id() const {
  std::string canon = fmt::format("version={}\n", version);
  for (const auto& [name, hash] : file_hashes) canon += fmt::format("file:{}={}\n", name, hash);
  canon += fmt::format("fleet_cap={}\nt_max_min={}\ngamma_reb={}\ngamma_time={}\n", params.fleet_cap,
                       params.time_threshold, params.gamma_reb, params.gamma_time);
  canon += fmt::format("solver={} {} {}\n", solver, feasibility_tol, optimality_tol);
  return sha256_hex(canon).substr(0, 16);
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["manifest_id"] = id();
  j["version"] = version;
  j["files"] = nlohmann::ordered_json::object();
  for (const auto& [name, hash] : file_hashes) j["files"][name] = hash;
  j["params"] = {{"fleet_cap", fmt::format("{}", params.fleet_cap)},
                 {"t_max_min", params.time_threshold},
                 {"gamma_reb", params.gamma_reb},
                 {"gamma_time", params.gamma_time}};
  j["solver"] = {{"name", solver}, {"feasibility_tol", feasibility_tol}, {"optimality_tol", optimality_tol}};
  if (!timestamp.empty()) j["timestamp"] = timestamp;
  return j.dump(1) + "\n";
}

}  // namespace iamod

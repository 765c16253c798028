/*
   Copyright 2026 The Blockbox Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <blockbox/topology/topology.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>

#include <blockbox/common/errors.hpp>

namespace blockbox::topology {

namespace {

    std::pair<NodeIndex, NodeIndex> ordered(const Edge& e) { return std::minmax(e.a, e.b); }

    std::vector<std::size_t> degrees(const TopologySpec& spec) {
        std::vector<std::size_t> out(spec.n, 0);
        const auto adj = spec.adjacency();
        for (NodeIndex i = 0; i < spec.n; ++i) out[i] = adj[i].size();
        return out;
    }

    void check_shape(const TopologySpec& spec, std::vector<Violation>& out) {
        const auto deg = degrees(spec);
        auto shape = [&](std::string detail) { out.push_back({ViolationKind::shape, std::move(detail)}); };
        switch (spec.kind) {
            case Kind::custom:
                return;
            case Kind::ring:
                if (spec.n < 3) shape("ring needs at least 3 nodes");
                for (NodeIndex i = 0; i < spec.n; ++i) {
                    if (deg[i] != 2) shape("ring node " + std::to_string(i) + " has degree " + std::to_string(deg[i]));
                }
                return;
            case Kind::star: {
                if (spec.n < 2) {
                    shape("star needs at least 2 nodes");
                    return;
                }
                const NodeIndex hub = spec.hub.value_or(0);
                if (hub >= spec.n) {
                    shape("star hub " + std::to_string(hub) + " out of range");
                    return;
                }
                for (NodeIndex i = 0; i < spec.n; ++i) {
                    const std::size_t want = i == hub ? spec.n - 1 : 1;
                    if (deg[i] != want) {
                        shape("star node " + std::to_string(i) + " has degree " + std::to_string(deg[i]) + ", expected " +
                              std::to_string(want));
                    }
                }
                return;
            }
            case Kind::grid: {
                if (!spec.rows || !spec.cols || std::uint64_t{*spec.rows} * *spec.cols != spec.n) {
                    shape("grid dimensions do not multiply to n");
                    return;
                }
                const NodeIndex cols = *spec.cols;
                std::set<std::pair<NodeIndex, NodeIndex>> want;
                for (NodeIndex i = 0; i < spec.n; ++i) {
                    if ((i % cols) + 1 < cols) want.emplace(i, i + 1);
                    if (i + cols < spec.n) want.emplace(i, i + cols);
                }
                std::set<std::pair<NodeIndex, NodeIndex>> have;
                for (const auto& e : spec.edges) have.insert(ordered(e));
                if (have != want) shape("grid edges are not the row-major 4-neighborhood");
                return;
            }
        }
    }

    NodeIndex squarest_rows(NodeIndex n) {
        auto r = static_cast<NodeIndex>(std::sqrt(static_cast<double>(n)));
        while (r > 1 && n % r != 0) --r;
        return std::max<NodeIndex>(r, 1);
    }

}  // namespace

std::string_view to_string(Kind kind) noexcept {
    switch (kind) {
        case Kind::ring: return "ring";
        case Kind::star: return "star";
        case Kind::grid: return "grid";
        case Kind::custom: return "custom";
    }
    return "custom";
}

Kind kind_from_string(std::string_view name) {
    for (auto k : {Kind::ring, Kind::star, Kind::grid, Kind::custom}) {
        if (to_string(k) == name) return k;
    }
    raise(ErrorCode::invalid_parameter, "unknown topology kind '" + std::string{name} + "'");
}

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::empty: return "empty";
        case ViolationKind::out_of_range: return "out-of-range";
        case ViolationKind::self_loop: return "self-loop";
        case ViolationKind::duplicate_edge: return "duplicate-edge";
        case ViolationKind::disconnected: return "disconnected";
        case ViolationKind::shape: return "shape";
    }
    return "shape";
}

std::vector<std::vector<NodeIndex>> TopologySpec::adjacency() const {
    std::vector<std::vector<NodeIndex>> adj(n);
    for (const auto& e : edges) {
        if (e.a == e.b || e.a >= n || e.b >= n) continue;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& nbrs : adj) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return adj;
}

bool TopologySpec::adjacent(NodeIndex a, NodeIndex b) const {
    return a != b && std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
               return (e.a == a && e.b == b) || (e.a == b && e.b == a);
           });
}

TopologySpec generate(Kind kind, NodeIndex n, const GenerateOptions& options) {
    TopologySpec spec;
    spec.kind = kind;
    spec.n = n;
    if (n < 1) raise(ErrorCode::invalid_parameter, "topology needs at least one node");
    switch (kind) {
        case Kind::ring:
            if (n < 3) raise(ErrorCode::invalid_parameter, "ring needs n >= 3, got " + std::to_string(n));
            for (NodeIndex i = 0; i < n; ++i) spec.edges.push_back({i, (i + 1) % n});
            break;
        case Kind::star: {
            if (n < 2) raise(ErrorCode::invalid_parameter, "star needs n >= 2, got " + std::to_string(n));
            const NodeIndex hub = options.hub.value_or(0);
            if (hub >= n) raise(ErrorCode::invalid_parameter, "star hub out of range");
            spec.hub = hub;
            for (NodeIndex i = 0; i < n; ++i) {
                if (i != hub) spec.edges.push_back({hub, i});
            }
            break;
        }
        case Kind::grid: {
            NodeIndex rows = 0;
            NodeIndex cols = 0;
            if (options.rows && options.cols) {
                rows = *options.rows;
                cols = *options.cols;
            } else if (options.rows || options.cols) {
                const NodeIndex given = options.rows ? *options.rows : *options.cols;
                if (given == 0 || n % given != 0) raise(ErrorCode::invalid_parameter, "grid dimension does not divide n");
                rows = options.rows ? given : n / given;
                cols = n / rows;
            } else {
                rows = squarest_rows(n);
                cols = n / rows;
            }
            if (std::uint64_t{rows} * cols != n) {
                raise(ErrorCode::invalid_parameter, "grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                                                        " does not hold " + std::to_string(n) + " nodes");
            }
            spec.rows = rows;
            spec.cols = cols;
            for (NodeIndex r = 0; r < rows; ++r) {
                for (NodeIndex c = 0; c < cols; ++c) {
                    const NodeIndex i = r * cols + c;
                    if (c + 1 < cols) spec.edges.push_back({i, i + 1});
                    if (r + 1 < rows) spec.edges.push_back({i, i + cols});
                }
            }
            break;
        }
        case Kind::custom:
            spec.edges = options.edges;
            break;
    }
    return spec;
}

std::vector<Violation> validate(const TopologySpec& spec) {
    std::vector<Violation> out;
    if (spec.n == 0) {
        out.push_back({ViolationKind::empty, "topology has no nodes"});
        return out;
    }
    std::set<std::pair<NodeIndex, NodeIndex>> seen;
    for (const auto& e : spec.edges) {
        const auto label = "(" + std::to_string(e.a) + "," + std::to_string(e.b) + ")";
        if (e.a >= spec.n || e.b >= spec.n) {
            out.push_back({ViolationKind::out_of_range, "edge " + label + " names a node outside 0.." + std::to_string(spec.n - 1)});
            continue;
        }
        if (e.a == e.b) {
            out.push_back({ViolationKind::self_loop, "edge " + label + " is a self-loop"});
            continue;
        }
        if (!seen.insert(ordered(e)).second) out.push_back({ViolationKind::duplicate_edge, "edge " + label + " repeats"});
    }
    const auto dist = distances_from(spec, 0);
    const auto unreachable = std::count(dist.begin(), dist.end(), -1);
    if (unreachable > 0) {
        out.push_back({ViolationKind::disconnected, std::to_string(unreachable) + " node(s) unreachable from node 0"});
    }
    check_shape(spec, out);
    return out;
}

std::vector<int> distances_from(const TopologySpec& spec, NodeIndex source) {
    std::vector<int> dist(spec.n, -1);
    if (source >= spec.n) return dist;
    const auto adj = spec.adjacency();
    std::deque<NodeIndex> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        const auto u = queue.front();
        queue.pop_front();
        for (auto v : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

Rational average_shortest_path(const TopologySpec& spec) {
    if (spec.n <= 1) return Rational{0};
    std::int64_t total = 0;
    for (NodeIndex s = 0; s < spec.n; ++s) {
        const auto dist = distances_from(spec, s);
        for (NodeIndex t = s + 1; t < spec.n; ++t) {
            if (dist[t] < 0) raise(ErrorCode::invalid_parameter, "topology is disconnected");
            total += dist[t];
        }
    }
    const std::int64_t pairs = std::int64_t{spec.n} * (spec.n - 1) / 2;
    return Rational{total, pairs};
}

void to_json(nlohmann::json& j, const TopologySpec& spec) {
    auto edges = nlohmann::json::array();
    for (const auto& e : spec.edges) edges.push_back({e.a, e.b});
    j = nlohmann::json{{"kind", to_string(spec.kind)}, {"n", spec.n}, {"edges", std::move(edges)}};
    if (spec.hub) j["hub"] = *spec.hub;
    if (spec.rows) j["rows"] = *spec.rows;
    if (spec.cols) j["cols"] = *spec.cols;
}

void from_json(const nlohmann::json& j, TopologySpec& spec) {
    try {
        const auto kind = kind_from_string(j.at("kind").get<std::string>());
        const auto n = j.at("n").get<NodeIndex>();
        GenerateOptions options;
        if (j.contains("hub")) options.hub = j.at("hub").get<NodeIndex>();
        if (j.contains("rows")) options.rows = j.at("rows").get<NodeIndex>();
        if (j.contains("cols")) options.cols = j.at("cols").get<NodeIndex>();
        if (j.contains("edges")) {
            for (const auto& e : j.at("edges")) {
                if (!e.is_array() || e.size() != 2) raise(ErrorCode::invalid_input, "edge must be a [a, b] pair");
                options.edges.push_back({e[0].get<NodeIndex>(), e[1].get<NodeIndex>()});
            }
        }
        if (kind == Kind::custom) {
            spec = generate(kind, n, options);
            return;
        }
        // Named kinds are regenerated for their options; explicit edges win so validate() can
        // report a hand-edited file that no longer matches its kind.
        auto generated = generate(kind, n, options);
        if (j.contains("edges")) generated.edges = options.edges;
        spec = std::move(generated);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed topology: "} + e.what());
    } catch (const Error& e) {
        raise(ErrorCode::invalid_input, std::string{"malformed topology: "} + e.what());
    }
}

}  // namespace blockbox::topology

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "merplan/csv.hpp"
#include "merplan/errors.hpp"

namespace merplan {

/// One switchable line section. Tie branches are normally open and only
/// closed during reconfiguration; the weight orders branches in the
/// spanning-forest search (lower weight is preferred).
struct Branch {
    int id = 0;
    int from_node = 0;
    int to_node = 0;
    bool is_tie = false;
    double weight = 0.0;
};

struct NodeLoad {
    int node = 0;
    double total_kw = 0.0;
    double critical_kw = 0.0;
    double critical_weight = 0.0;  // in [0,1]; scales critical_kw in curtailment sums
};

/// Spanning forest chosen for one outage scenario: the branches kept closed
/// plus the resulting island partition. Island 0 always contains the source.
struct Reconfiguration {
    int scenario_id = 0;
    std::set<int> closed_branches;
    std::map<int, int> island_of;  // node id -> island index, dense 0..island_count-1
    int island_count = 0;
};

namespace detail {

class UnionFind {
  public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t root(std::size_t i) {
        while (i != parent_[i]) {
            parent_[i] = parent_[parent_[i]];  // path halving
            i = parent_[i];
        }
        return i;
    }

    bool unite(std::size_t a, std::size_t b) {
        std::size_t ra = root(a), rb = root(b);
        if (ra == rb) return false;
        if (size_[ra] < size_[rb]) std::swap(ra, rb);
        parent_[rb] = ra;
        size_[ra] += size_[rb];
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

}  // namespace detail

/// Immutable distribution feeder: undirected graph plus per-node loads.
/// Validated on construction; all query methods are const and thread-safe.
///
/// Structural requirements: the graph with every branch closed is connected,
/// and the normally-closed (non-tie) branches alone form a spanning tree.
class Network {
  public:
    Network(std::vector<int> nodes, std::vector<Branch> branches, int source_node,
            std::vector<NodeLoad> loads)
        : nodes_(std::move(nodes)),
          branches_(std::move(branches)),
          source_node_(source_node) {
        validate_and_index(std::move(loads));
    }

    const std::vector<int>& nodes() const { return nodes_; }
    const std::vector<Branch>& branches() const { return branches_; }
    int source_node() const { return source_node_; }
    std::size_t node_count() const { return nodes_.size(); }

    bool has_node(int id) const { return node_index_.count(id) != 0; }

    std::size_t node_index(int id) const {
        auto it = node_index_.find(id);
        if (it == node_index_.end()) throw UnknownNode("unknown node id " + std::to_string(id));
        return it->second;
    }

    bool has_branch(int id) const { return branch_index_.count(id) != 0; }

    const Branch& branch(int id) const {
        auto it = branch_index_.find(id);
        if (it == branch_index_.end()) throw UnknownBranch("unknown branch id " + std::to_string(id));
        return branches_[it->second];
    }

    const NodeLoad& load_of(int node_id) const { return loads_[node_index(node_id)]; }
    const std::vector<NodeLoad>& loads() const { return loads_; }

    /// Sum of critical_weight * critical_kw over all nodes.
    double total_critical_kw() const { return total_critical_kw_; }
    double total_load_kw() const { return total_load_kw_; }

    /// Critical-load nodes (critical_weight * critical_kw > 0), ascending id.
    std::vector<int> critical_nodes() const {
        std::vector<int> out;
        for (const NodeLoad& l : loads_) {
            if (l.critical_weight * l.critical_kw > 0.0) out.push_back(l.node);
        }
        return out;
    }

    std::vector<int> branch_ids(bool ties_only = false) const {
        std::vector<int> out;
        for (const Branch& b : branches_) {
            if (!ties_only || b.is_tie) out.push_back(b.id);
        }
        return out;
    }

  private:
    void validate_and_index(std::vector<NodeLoad> loads) {
        if (nodes_.empty()) throw ParseError("network has no nodes");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!node_index_.emplace(nodes_[i], i).second) {
                throw ParseError("duplicate node id " + std::to_string(nodes_[i]));
            }
        }
        if (!has_node(source_node_)) {
            throw UnknownNode("source node " + std::to_string(source_node_) +
                              " is not a node of the network");
        }

        std::sort(branches_.begin(), branches_.end(),
                  [](const Branch& a, const Branch& b) { return a.id < b.id; });
        for (std::size_t i = 0; i < branches_.size(); ++i) {
            const Branch& b = branches_[i];
            if (!branch_index_.emplace(b.id, i).second) {
                throw DuplicateBranchId("duplicate branch id " + std::to_string(b.id));
            }
            if (b.from_node == b.to_node) {
                throw ParseError("branch " + std::to_string(b.id) + " is a self-loop");
            }
            if (!has_node(b.from_node) || !has_node(b.to_node)) {
                throw UnknownNode("branch " + std::to_string(b.id) +
                                  " references a node that is not in the node list");
            }
            if (b.weight < 0.0) {
                throw ParseError("branch " + std::to_string(b.id) + " has negative weight");
            }
        }

        // Fully-closed graph must be connected.
        detail::UnionFind all(nodes_.size());
        std::size_t components = nodes_.size();
        for (const Branch& b : branches_) {
            if (all.unite(node_index_.at(b.from_node), node_index_.at(b.to_node))) --components;
        }
        if (components != 1) {
            throw DisconnectedBaseGraph("graph with all branches closed has " +
                                        std::to_string(components) + " components");
        }

        // Normally-closed branches must form a spanning tree.
        detail::UnionFind closed(nodes_.size());
        std::size_t non_tie = 0;
        for (const Branch& b : branches_) {
            if (b.is_tie) continue;
            ++non_tie;
            if (!closed.unite(node_index_.at(b.from_node), node_index_.at(b.to_node))) {
                throw NonRadialClosedSet("non-tie branches contain a cycle through branch " +
                                         std::to_string(b.id));
            }
        }
        if (non_tie != nodes_.size() - 1) {
            throw NonRadialClosedSet("expected " + std::to_string(nodes_.size() - 1) +
                                     " non-tie branches, found " + std::to_string(non_tie));
        }

        loads_.assign(nodes_.size(), NodeLoad{});
        for (std::size_t i = 0; i < nodes_.size(); ++i) loads_[i].node = nodes_[i];
        std::vector<bool> seen(nodes_.size(), false);
        for (const NodeLoad& l : loads) {
            std::size_t idx = node_index(l.node);
            if (seen[idx]) throw ParseError("duplicate load record for node " + std::to_string(l.node));
            seen[idx] = true;
            if (l.total_kw < 0.0 || l.critical_kw < 0.0) {
                throw ParseError("negative load at node " + std::to_string(l.node));
            }
            if (l.critical_kw > l.total_kw) {
                throw ParseError("critical load exceeds total load at node " + std::to_string(l.node));
            }
            if (l.critical_weight < 0.0 || l.critical_weight > 1.0) {
                throw ParseError("critical weight outside [0,1] at node " + std::to_string(l.node));
            }
            loads_[idx] = l;
        }

        total_load_kw_ = 0.0;
        total_critical_kw_ = 0.0;
        for (const NodeLoad& l : loads_) {
            total_load_kw_ += l.total_kw;
            total_critical_kw_ += l.critical_weight * l.critical_kw;
        }
    }

    std::vector<int> nodes_;
    std::vector<Branch> branches_;  // sorted by id
    int source_node_;
    std::vector<NodeLoad> loads_;  // aligned with nodes_
    std::unordered_map<int, std::size_t> node_index_;
    std::unordered_map<int, std::size_t> branch_index_;
    double total_load_kw_ = 0.0;
    double total_critical_kw_ = 0.0;
};

namespace detail {

/// Dense island labels from a union-find: the source island gets index 0,
/// the rest are numbered by first appearance in network node order.
inline std::pair<std::map<int, int>, int> dense_islands(const Network& net, UnionFind& uf) {
    std::map<int, int> island_of;
    std::unordered_map<std::size_t, int> label_of_root;
    label_of_root.emplace(uf.root(net.node_index(net.source_node())), 0);
    int next = 1;
    for (int node : net.nodes()) {
        std::size_t r = uf.root(net.node_index(node));
        auto it = label_of_root.find(r);
        if (it == label_of_root.end()) it = label_of_root.emplace(r, next++).first;
        island_of.emplace(node, it->second);
    }
    return {std::move(island_of), next};
}

}  // namespace detail

/// Island partition induced by a set of available branches. Two nodes share
/// an island index iff they are connected through available branches.
inline std::pair<std::map<int, int>, int> connected_components(const Network& net,
                                                               const std::set<int>& available) {
    detail::UnionFind uf(net.node_count());
    for (int id : available) {
        const Branch& b = net.branch(id);  // throws UnknownBranch on bad input
        uf.unite(net.node_index(b.from_node), net.node_index(b.to_node));
    }
    return detail::dense_islands(net, uf);
}

/// Greedy Kruskal over the branches that survive the outage, ordered by
/// (weight ascending, branch id ascending). The result is a maximal spanning
/// forest: every surviving branch left open would close a cycle.
inline Reconfiguration kruskal_spanning_forest(const Network& net, const std::set<int>& outaged,
                                               int scenario_id = 0) {
    for (int id : outaged) {
        if (!net.has_branch(id)) throw UnknownBranch("outaged branch id " + std::to_string(id));
    }

    std::vector<const Branch*> available;
    available.reserve(net.branches().size());
    for (const Branch& b : net.branches()) {
        if (!outaged.count(b.id)) available.push_back(&b);
    }
    // branches() is id-sorted, so a stable sort on weight yields (weight, id) order
    std::stable_sort(available.begin(), available.end(),
                     [](const Branch* a, const Branch* b) { return a->weight < b->weight; });

    Reconfiguration rc;
    rc.scenario_id = scenario_id;
    detail::UnionFind uf(net.node_count());
    for (const Branch* b : available) {
        if (uf.unite(net.node_index(b->from_node), net.node_index(b->to_node))) {
            rc.closed_branches.insert(b->id);
        }
    }
    auto [island_of, count] = detail::dense_islands(net, uf);
    rc.island_of = std::move(island_of);
    rc.island_count = count;
    return rc;
}

inline std::vector<Branch> parse_branch_records(
    const std::vector<std::pair<int, std::vector<std::string>>>& rows) {
    std::vector<Branch> out;
    bool first = true;
    for (const auto& [lineno, cells] : rows) {
        long long probe;
        if (first && !csv::parse_int(cells[0], probe)) {
            first = false;  // header row
            continue;
        }
        first = false;
        if (cells.size() != 4) {
            throw ParseError("branches line " + std::to_string(lineno) +
                             ": expected 4 columns id,from,to,tie");
        }
        std::string ctx = "branches line " + std::to_string(lineno);
        Branch b;
        b.id = static_cast<int>(csv::require_int(cells[0], ctx));
        b.from_node = static_cast<int>(csv::require_int(cells[1], ctx));
        b.to_node = static_cast<int>(csv::require_int(cells[2], ctx));
        long long tie = csv::require_int(cells[3], ctx);
        if (tie != 0 && tie != 1) throw ParseError(ctx + ": tie flag must be 0 or 1");
        b.is_tie = tie == 1;
        // normally-closed branches are preferred over ties when reconfiguring,
        // which minimizes switching actions
        b.weight = b.is_tie ? 1.0 : 0.0;
        out.push_back(b);
    }
    return out;
}

inline std::vector<NodeLoad> parse_load_records(
    const std::vector<std::pair<int, std::vector<std::string>>>& rows) {
    std::vector<NodeLoad> out;
    bool first = true;
    for (const auto& [lineno, cells] : rows) {
        long long probe;
        if (first && !csv::parse_int(cells[0], probe)) {
            first = false;  // header row
            continue;
        }
        first = false;
        if (cells.size() != 3) {
            throw ParseError("loads line " + std::to_string(lineno) +
                             ": expected 3 columns node,load_kw,critical_kw");
        }
        std::string ctx = "loads line " + std::to_string(lineno);
        NodeLoad l;
        l.node = static_cast<int>(csv::require_int(cells[0], ctx));
        l.total_kw = csv::require_double(cells[1], ctx);
        l.critical_kw = csv::require_double(cells[2], ctx);
        l.critical_weight = l.critical_kw > 0.0 ? 1.0 : 0.0;
        out.push_back(l);
    }
    return out;
}

/// Builds a Network from branch and load records. The node set is the union
/// of branch endpoints and load-record nodes, ascending. source_node selects
/// the grid substation (there is exactly one).
inline Network load_network(const std::vector<Branch>& branch_records,
                            const std::vector<NodeLoad>& load_records, int source_node) {
    std::set<int> node_set;
    for (const Branch& b : branch_records) {
        node_set.insert(b.from_node);
        node_set.insert(b.to_node);
    }
    for (const NodeLoad& l : load_records) node_set.insert(l.node);
    std::vector<int> nodes(node_set.begin(), node_set.end());
    return Network(std::move(nodes), branch_records, source_node, load_records);
}

inline Network load_network_files(const std::string& branches_path, const std::string& loads_path,
                                  int source_node) {
    auto branches = parse_branch_records(csv::read_rows_file(branches_path));
    auto loads = parse_load_records(csv::read_rows_file(loads_path));
    return load_network(branches, loads, source_node);
}

}  // namespace merplan

//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/juncttree.h"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <spdlog/spdlog.h>

#include "polish/canon.h"
#include "polish/error.h"
#include "polish/smiles.h"

namespace polish {
namespace {
  using EdgeSet = std::vector<std::uint64_t>;

  class DisjointSets {
  public:
    explicit DisjointSets(int n): parent_(n) {
      std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
      while (parent_[x] != x)
        x = parent_[x] = parent_[parent_[x]];
      return x;
    }

    bool unite(int a, int b) {
      a = find(a);
      b = find(b);
      if (a == b)
        return false;
      parent_[std::max(a, b)] = std::min(a, b);
      return true;
    }

  private:
    std::vector<int> parent_;
  };

  std::vector<int> ring_from_edges(const MolGraph &g, const EdgeSet &edges) {
    std::vector<std::vector<int>> adj(g.num_atoms());
    int start = g.num_atoms();
    for (int b = 0; b < g.num_bonds(); ++b) {
      if (!((edges[b >> 6] >> (b & 63)) & 1))
        continue;
      const Bond &bond = g.bond(b);
      adj[bond.begin].push_back(bond.end);
      adj[bond.end].push_back(bond.begin);
      start = std::min({ start, bond.begin, bond.end });
    }
    std::vector<int> ring { start };
    int prev = -1, cur = start;
    while (true) {
      std::vector<int> &next = adj[cur];
      std::sort(next.begin(), next.end());
      const int step = next[0] != prev ? next[0] : next[1];
      if (step == start)
        break;
      ring.push_back(step);
      prev = cur;
      cur = step;
    }
    return ring;
  }

  std::vector<int> intersection(const std::vector<int> &a,
                                const std::vector<int> &b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out));
    return out;
  }

  bool atoms_compatible(const AtomSpec &a, const AtomSpec &b) {
    return same_match_class(a, b) && a.explicit_h == b.explicit_h;
  }

  bool is_cyclic(const MolGraph &g) {
    return g.num_bonds() >= g.num_atoms() && g.num_atoms() > 2;
  }

  // Ring atom sets after fusing rings that share more than a bond.
  std::vector<std::vector<int>>
  merged_rings(const MolGraph &g, std::vector<std::vector<int>> rings) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t a = 0; a < rings.size() && !changed; ++a) {
        for (std::size_t b = a + 1; b < rings.size() && !changed; ++b) {
          const std::vector<int> shared = intersection(rings[a], rings[b]);
          const bool fuse =
              shared.size() > 2
              || (shared.size() == 2 && g.find_bond(shared[0], shared[1]) < 0);
          if (!fuse)
            continue;
          std::vector<int> merged;
          std::set_union(rings[a].begin(), rings[a].end(), rings[b].begin(),
                         rings[b].end(), std::back_inserter(merged));
          rings[a] = std::move(merged);
          rings.erase(rings.begin() + static_cast<std::ptrdiff_t>(b));
          changed = true;
        }
      }
    }
    return rings;
  }

  JunctionTree build_tree(const MolGraph &g, int root_atom) {
    const int n = g.num_atoms();
    const std::vector<int> rank = canonical_rank(g);

    std::vector<std::vector<int>> ring_sets;
    for (std::vector<int> &ring: sssr(g)) {
      std::sort(ring.begin(), ring.end());
      ring_sets.push_back(std::move(ring));
    }
    const std::vector<bool> ring_bond = g.ring_bonds();

    while (true) {
      ring_sets = merged_rings(g, ring_sets);

      std::vector<Cluster> clusters;
      for (const std::vector<int> &ring: ring_sets)
        clusters.push_back({ ring, ClusterKind::kRing });
      for (int b = 0; b < g.num_bonds(); ++b) {
        if (ring_bond[b])
          continue;
        const Bond &bond = g.bond(b);
        clusters.push_back({ { std::min(bond.begin, bond.end),
                               std::max(bond.begin, bond.end) },
                             ClusterKind::kBond });
      }

      std::vector<int> membership(n, 0);
      for (const Cluster &c: clusters) {
        for (int a: c.atoms)
          ++membership[a];
      }
      std::vector<bool> hub(n, false);
      for (int a = 0; a < n; ++a) {
        if (membership[a] >= 3 || membership[a] == 0 || a == root_atom) {
          hub[a] = true;
          clusters.push_back({ { a }, ClusterKind::kSingleton });
        }
      }

      // Canonical node order: clusters compared by their sorted atom ranks.
      std::vector<std::vector<int>> sort_keys;
      for (const Cluster &c: clusters) {
        std::vector<int> key;
        for (int a: c.atoms)
          key.push_back(rank[a]);
        std::sort(key.begin(), key.end());
        key.insert(key.begin(), static_cast<int>(c.kind));
        sort_keys.push_back(std::move(key));
      }
      std::vector<int> order(clusters.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return sort_keys[a] < sort_keys[b]; });

      JunctionTree t;
      for (int k: order)
        t.nodes.push_back(clusters[k]);
      const int m = t.num_nodes();

      struct Edge {
        int weight, a, b;
      };
      std::vector<Edge> edges;
      for (int a = 0; a < m; ++a) {
        const Cluster &ca = t.nodes[a];
        for (int b = a + 1; b < m; ++b) {
          const Cluster &cb = t.nodes[b];
          const std::vector<int> shared = intersection(ca.atoms, cb.atoms);
          if (shared.empty())
            continue;
          const bool a_hub = ca.kind == ClusterKind::kSingleton;
          const bool b_hub = cb.kind == ClusterKind::kSingleton;
          if (a_hub || b_hub) {
            edges.push_back({ 1, a, b });
            continue;
          }
          // Clusters meeting only at hub atoms connect through the hub.
          const bool all_hubs = std::all_of(shared.begin(), shared.end(),
                                            [&](int x) { return hub[x]; });
          if (!all_hubs)
            edges.push_back({ static_cast<int>(shared.size()), a, b });
        }
      }
      std::stable_sort(edges.begin(), edges.end(),
                       [](const Edge &x, const Edge &y) {
                         return x.weight > y.weight;
                       });

      DisjointSets sets(m);
      t.adjacency.assign(m, {});
      for (const Edge &e: edges) {
        if (sets.unite(e.a, e.b)) {
          t.edges.emplace_back(e.a, e.b);
          t.adjacency[e.a].push_back(e.b);
          t.adjacency[e.b].push_back(e.a);
        }
      }
      for (std::vector<int> &adj: t.adjacency)
        std::sort(adj.begin(), adj.end());

      t.root = 0;
      if (root_atom >= 0) {
        for (int k = 0; k < m; ++k) {
          if (t.nodes[k].kind == ClusterKind::kSingleton
              && t.nodes[k].atoms[0] == root_atom)
            t.root = k;
        }
      }

      // Repair: ring clusters sharing an atom whose clusters do not form a
      // subtree are fused and the tree is rebuilt.
      int broken = -1;
      for (int a = 0; a < n && broken < 0; ++a) {
        std::vector<int> holders;
        for (int k = 0; k < m; ++k) {
          if (std::binary_search(t.nodes[k].atoms.begin(),
                                 t.nodes[k].atoms.end(), a))
            holders.push_back(k);
        }
        std::vector<bool> seen(m, false);
        std::vector<int> stack { holders[0] };
        seen[holders[0]] = true;
        int reached = 0;
        while (!stack.empty()) {
          const int u = stack.back();
          stack.pop_back();
          ++reached;
          for (int v: t.adjacency[u]) {
            if (!seen[v] && std::binary_search(t.nodes[v].atoms.begin(),
                                               t.nodes[v].atoms.end(), a)) {
              seen[v] = true;
              stack.push_back(v);
            }
          }
        }
        if (reached != static_cast<int>(holders.size()))
          broken = a;
      }
      if (broken < 0)
        return t;

      std::vector<int> fused;
      std::vector<std::vector<int>> rest;
      for (std::vector<int> &ring: ring_sets) {
        if (std::binary_search(ring.begin(), ring.end(), broken))
          fused.insert(fused.end(), ring.begin(), ring.end());
        else
          rest.push_back(std::move(ring));
      }
      std::sort(fused.begin(), fused.end());
      fused.erase(std::unique(fused.begin(), fused.end()), fused.end());
      spdlog::debug("junction tree: fusing ring clusters at atom {}", broken);
      rest.push_back(std::move(fused));
      if (rest.size() == ring_sets.size())
        throw Error("junction tree repair made no progress");
      ring_sets = std::move(rest);
    }
  }

  std::vector<std::vector<int>> membership_lists(const PartialAssembly &p) {
    std::vector<std::vector<int>> lists(p.molecule.num_atoms());
    for (int k = 0; k < static_cast<int>(p.node_atoms.size()); ++k) {
      for (int a: p.node_atoms[k])
        lists[a].push_back(k);
    }
    return lists;
  }
}  // namespace

std::vector<std::vector<int>> sssr(const MolGraph &g) {
  const int n = g.num_atoms(), m = g.num_bonds();
  const int expected = m - n + g.num_components();
  if (expected <= 0)
    return {};
  const std::size_t words = (m + 63) / 64;

  std::vector<std::pair<int, EdgeSet>> candidates;
  std::set<EdgeSet> seen;
  std::vector<int> dist(n), via(n);
  for (int v = 0; v < n; ++v) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(via.begin(), via.end(), -1);
    std::vector<int> queue { v };
    dist[v] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (const Neighbor &nb: g.neighbors(u)) {
        if (dist[nb.atom] < 0) {
          dist[nb.atom] = dist[u] + 1;
          via[nb.atom] = nb.bond;
          queue.push_back(nb.atom);
        }
      }
    }

    for (int b = 0; b < m; ++b) {
      const Bond &bond = g.bond(b);
      const int x = bond.begin, y = bond.end;
      if (dist[x] < 0 || via[x] == b || via[y] == b)
        continue;
      EdgeSet edges(words, 0);
      std::vector<int> path_atoms;
      for (int end: { x, y }) {
        for (int u = end; u != v; u = g.bond(via[u]).other(u)) {
          path_atoms.push_back(u);
          edges[via[u] >> 6] ^= std::uint64_t { 1 } << (via[u] & 63);
        }
      }
      std::sort(path_atoms.begin(), path_atoms.end());
      if (std::adjacent_find(path_atoms.begin(), path_atoms.end())
          != path_atoms.end())
        continue;
      edges[b >> 6] |= std::uint64_t { 1 } << (b & 63);
      if (seen.insert(edges).second)
        candidates.emplace_back(dist[x] + dist[y] + 1, std::move(edges));
    }
  }
  std::sort(candidates.begin(), candidates.end());

  // Gaussian elimination over GF(2), rows kept with distinct pivots.
  std::vector<std::pair<int, EdgeSet>> basis;
  std::vector<std::vector<int>> rings;
  for (const auto &[length, edges]: candidates) {
    EdgeSet row = edges;
    for (const auto &[pivot, brow]: basis) {
      if ((row[pivot >> 6] >> (pivot & 63)) & 1) {
        for (std::size_t w = 0; w < words; ++w)
          row[w] ^= brow[w];
      }
    }
    int pivot = -1;
    for (int b = 0; b < m && pivot < 0; ++b) {
      if ((row[b >> 6] >> (b & 63)) & 1)
        pivot = b;
    }
    if (pivot < 0)
      continue;
    for (auto &[p, brow]: basis) {
      if ((brow[pivot >> 6] >> (pivot & 63)) & 1) {
        for (std::size_t w = 0; w < words; ++w)
          brow[w] ^= row[w];
      }
    }
    basis.emplace_back(pivot, std::move(row));
    rings.push_back(ring_from_edges(g, edges));
    if (static_cast<int>(rings.size()) == expected)
      break;
  }
  return rings;
}

std::vector<int> JunctionTree::preorder() const {
  std::vector<int> out;
  if (nodes.empty())
    return out;
  std::vector<bool> seen(nodes.size(), false);
  std::vector<int> stack { root };
  seen[root] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (auto it = adjacency[u].rbegin(); it != adjacency[u].rend(); ++it) {
      if (!seen[*it]) {
        seen[*it] = true;
        stack.push_back(*it);
      }
    }
  }
  return out;
}

std::vector<int> JunctionTree::parents() const {
  std::vector<int> parent(nodes.size(), -1);
  std::vector<bool> seen(nodes.size(), false);
  if (nodes.empty())
    return parent;
  std::vector<int> stack { root };
  seen[root] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v: adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        parent[v] = u;
        stack.push_back(v);
      }
    }
  }
  return parent;
}

JunctionTree decompose(const MolGraph &g) { return build_tree(g, -1); }

JunctionTree decompose(const MolGraph &g, int root_atom) {
  return build_tree(g, root_atom);
}

bool running_intersection(const JunctionTree &t, int num_atoms) {
  for (int a = 0; a < num_atoms; ++a) {
    int holders = 0, internal_edges = 0;
    for (const Cluster &c: t.nodes) {
      if (std::binary_search(c.atoms.begin(), c.atoms.end(), a))
        ++holders;
    }
    for (const auto &[u, v]: t.edges) {
      const auto &au = t.nodes[u].atoms, &av = t.nodes[v].atoms;
      if (std::binary_search(au.begin(), au.end(), a)
          && std::binary_search(av.begin(), av.end(), a))
        ++internal_edges;
    }
    // A forest on the holders is connected iff it has holders - 1 edges.
    if (holders == 0 || internal_edges != holders - 1)
      return false;
  }
  return true;
}

MolGraph cluster_graph(const MolGraph &g, const Cluster &c) {
  return g.subgraph(c.atoms);
}

std::string cluster_key(const MolGraph &g, const Cluster &c) {
  return write_smiles(cluster_graph(g, c));
}

ComponentVocabulary::ComponentVocabulary(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  for (int k = 0; k < size(); ++k)
    index_.emplace(entries_[k].smiles, k);
}

std::optional<int> ComponentVocabulary::lookup(const std::string &smiles) const {
  const auto it = index_.find(smiles);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

void ComponentVocabulary::write(std::ostream &os) const {
  for (int k = 0; k < size(); ++k)
    os << k << '\t' << entries_[k].count << '\t' << entries_[k].smiles << '\n';
}

ComponentVocabulary ComponentVocabulary::read(std::istream &is) {
  std::vector<Entry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::istringstream fields(line);
    int id = -1;
    Entry e;
    if (!(fields >> id >> e.count >> e.smiles)
        || id != static_cast<int>(entries.size()))
      throw Error("malformed vocabulary line " + std::to_string(line_no));
    e.graph = parse_smiles(e.smiles);
    entries.push_back(std::move(e));
  }
  return ComponentVocabulary(std::move(entries));
}

ComponentVocabulary build_vocabulary(
    std::span<const std::pair<const MolGraph *, const JunctionTree *>> trees) {
  std::map<std::string, long> counts;
  for (const auto &[g, t]: trees) {
    for (const Cluster &c: t->nodes)
      ++counts[cluster_key(*g, c)];
  }
  std::vector<std::pair<std::string, long>> sorted(counts.begin(),
                                                   counts.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto &a, const auto &b) {
                     return a.second > b.second;
                   });
  std::vector<ComponentVocabulary::Entry> entries;
  for (auto &[smiles, count]: sorted) {
    MolGraph graph = parse_smiles(smiles);
    entries.push_back({ std::move(smiles), count, std::move(graph) });
  }
  return ComponentVocabulary(std::move(entries));
}

ComponentVocabulary build_vocabulary(std::span<const MolGraph> corpus) {
  std::vector<JunctionTree> trees;
  trees.reserve(corpus.size());
  for (const MolGraph &g: corpus)
    trees.push_back(decompose(g));
  std::vector<std::pair<const MolGraph *, const JunctionTree *>> refs;
  for (std::size_t k = 0; k < corpus.size(); ++k)
    refs.emplace_back(&corpus[k], &trees[k]);
  return build_vocabulary(refs);
}

PartialAssembly start_assembly(const MolGraph &root) {
  PartialAssembly p;
  p.molecule = root;
  p.node_atoms.emplace_back(root.num_atoms());
  std::iota(p.node_atoms[0].begin(), p.node_atoms[0].end(), 0);
  return p;
}

PartialAssembly attach(const PartialAssembly &partial, const MolGraph &cluster,
                       int parent, const Attachment &attachment) {
  const MolGraph &mol = partial.molecule;
  const std::vector<int> &host = partial.node_atoms.at(parent);
  std::vector<int> global(cluster.num_atoms(), -1);
  for (const auto &[local, g]: attachment.overlap) {
    if (local < 0 || local >= cluster.num_atoms() || global[local] >= 0)
      throw Error("invalid attachment local atom");
    if (std::find(host.begin(), host.end(), g) == host.end())
      throw Error("attachment atom outside the parent cluster");
    if (!atoms_compatible(cluster.atom(local), mol.atom(g)))
      throw Error("attachment atoms differ");
    global[local] = g;
  }

  std::vector<AtomSpec> atoms(mol.atoms().begin(), mol.atoms().end());
  std::vector<Bond> bonds(mol.bonds().begin(), mol.bonds().end());
  for (int k = 0; k < cluster.num_atoms(); ++k) {
    if (global[k] < 0) {
      global[k] = static_cast<int>(atoms.size());
      atoms.push_back(cluster.atom(k));
    }
  }
  for (const Bond &bond: cluster.bonds()) {
    const int a = global[bond.begin], b = global[bond.end];
    if (a < mol.num_atoms() && b < mol.num_atoms()) {
      const int existing = mol.find_bond(a, b);
      if (existing < 0 || mol.bond(existing).order != bond.order)
        throw Error("overlapping bond mismatch");
      continue;
    }
    bonds.push_back({ a, b, bond.order });
  }

  PartialAssembly out;
  out.molecule = MolGraph(std::move(atoms), std::move(bonds));
  out.node_atoms = partial.node_atoms;
  out.node_atoms.push_back(std::move(global));
  return out;
}

std::string assembly_key(const PartialAssembly &partial) {
  const std::vector<std::vector<int>> lists = membership_lists(partial);
  std::map<std::vector<int>, int> ids;
  for (const std::vector<int> &l: lists)
    ids.emplace(l, 0);
  std::string suffix;
  int next = 0;
  for (auto &[l, id]: ids) {
    id = next++;
    suffix += '|';
    for (int k: l)
      suffix += std::to_string(k) + ',';
  }
  std::vector<int> classes;
  classes.reserve(lists.size());
  for (const std::vector<int> &l: lists)
    classes.push_back(ids[l]);
  return write_smiles(partial.molecule, { .atom_classes = classes }) + suffix;
}

std::vector<AssemblyCandidate>
enumerate_assemblies(const PartialAssembly &partial, const MolGraph &cluster,
                     int parent, const AssemblyOptions &opts) {
  const MolGraph &mol = partial.molecule;
  const std::vector<int> &host = partial.node_atoms.at(parent);

  std::vector<Attachment> options;
  for (int k = 0; k < cluster.num_atoms(); ++k) {
    for (int g: host) {
      if (atoms_compatible(cluster.atom(k), mol.atom(g)))
        options.push_back({ { { k, g } } });
    }
  }
  if (is_cyclic(cluster)) {
    const MolGraph host_graph = mol.subgraph(host);
    if (is_cyclic(host_graph)) {
      for (const Bond &cb: cluster.bonds()) {
        for (const Bond &hb: host_graph.bonds()) {
          if (cb.order != hb.order)
            continue;
          const int a = host[hb.begin], b = host[hb.end];
          options.push_back({ { { cb.begin, a }, { cb.end, b } } });
          options.push_back({ { { cb.begin, b }, { cb.end, a } } });
        }
      }
    }
  }

  std::map<std::string, AssemblyCandidate> unique;
  for (Attachment &att: options) {
    PartialAssembly result;
    try {
      result = attach(partial, cluster, parent, att);
    } catch (const Error &) {
      continue;
    }
    std::string key = assembly_key(result);
    if (unique.count(key) == 0)
      unique.emplace(key, AssemblyCandidate { std::move(att),
                                              std::move(result), key });
  }
  if (unique.empty())
    throw NoValidAttachment("no valid attachment for cluster "
                            + write_smiles(cluster));

  std::vector<AssemblyCandidate> out;
  out.reserve(std::min(unique.size(), opts.max_candidates));
  for (auto &[key, cand]: unique) {
    if (out.size() == opts.max_candidates) {
      spdlog::warn("assembly candidates capped at {} (of {})",
                   opts.max_candidates, unique.size());
      break;
    }
    out.push_back(std::move(cand));
  }
  return out;
}

AssemblyPlan ground_truth_plan(const MolGraph &g, const JunctionTree &t) {
  AssemblyPlan plan;
  const std::vector<int> order = t.preorder();
  const std::vector<int> tree_parent = t.parents();
  std::vector<int> plan_index(t.num_nodes(), -1);
  std::vector<int> realized(g.num_atoms(), -1);
  int next_atom = 0;

  for (int node: order) {
    const Cluster &c = t.nodes[node];
    const int idx = static_cast<int>(plan.clusters.size());
    plan_index[node] = idx;
    plan.clusters.push_back(cluster_graph(g, c));
    plan.tree_node.push_back(node);
    Attachment att;
    for (int k = 0; k < static_cast<int>(c.atoms.size()); ++k) {
      const int a = c.atoms[k];
      if (realized[a] >= 0)
        att.overlap.emplace_back(k, realized[a]);
    }
    for (int a: c.atoms) {
      if (realized[a] < 0)
        realized[a] = next_atom++;
    }
    plan.parent.push_back(tree_parent[node] < 0 ? -1
                                                : plan_index[tree_parent[node]]);
    plan.attachments.push_back(std::move(att));
  }
  return plan;
}

MolGraph realize_molecule(const AssemblyPlan &plan) {
  if (plan.clusters.empty())
    return MolGraph();
  PartialAssembly p = start_assembly(plan.clusters[0]);
  for (std::size_t k = 1; k < plan.clusters.size(); ++k)
    p = attach(p, plan.clusters[k], plan.parent[k], plan.attachments[k]);
  return p.molecule;
}

}  // namespace polish

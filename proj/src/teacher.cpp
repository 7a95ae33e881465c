//
// SPDX-License-Identifier: Apache-2.0
//

#include "polish/teacher.h"

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "polish/canon.h"
#include "polish/error.h"

namespace polish {

std::vector<BranchMatch> match_branches(const BranchSet &bx,
                                        const BranchSet &by) {
  std::vector<BranchMatch> out;
  for (const auto &[key, xs]: bx.by_class) {
    const auto it = by.by_class.find(key);
    if (it == by.by_class.end())
      continue;
    const std::size_t k = std::min(xs.size(), it->second.size());
    for (std::size_t m = 0; m < k; ++m)
      out.push_back({ xs[m], it->second[m] });
  }
  std::sort(out.begin(), out.end(),
            [](const BranchMatch &a, const BranchMatch &b) { return a.x < b.x; });
  return out;
}

int center_score(const BranchSet &bx, const BranchSet &by) {
  int score = 0;
  for (const auto &[key, xs]: bx.by_class) {
    const auto it = by.by_class.find(key);
    if (it == by.by_class.end())
      continue;
    const int k = static_cast<int>(std::min(xs.size(), it->second.size()));
    score += k * bx.branches[xs.front()].size();
  }
  return score;
}

int center_score(const MolGraph &x, int i, const MolGraph &y, int j) {
  return center_score(branches_around(x, i), branches_around(y, j));
}

PairContext::PairContext(const MolGraph &x, const MolGraph &y)
    : x_(&x), y_(&y), x_ranks_(canonical_rank(x)),
      y_ranks_(canonical_rank(y)) {
  x_sets_.reserve(x.num_atoms());
  for (int i = 0; i < x.num_atoms(); ++i)
    x_sets_.push_back(branches_around(x, i, x_ranks_));
  y_sets_.reserve(y.num_atoms());
  for (int j = 0; j < y.num_atoms(); ++j)
    y_sets_.push_back(branches_around(y, j, y_ranks_));
}

CenterScoreTable center_distribution(const PairContext &ctx) {
  const MolGraph &x = ctx.source(), &y = ctx.target();
  CenterScoreTable t;
  t.raw.assign(x.num_atoms(), 0);
  t.best_mapped.assign(x.num_atoms(), -1);
  const std::vector<int> &yr = ctx.target_ranks();

  for (int i = 0; i < x.num_atoms(); ++i) {
    for (int j = 0; j < y.num_atoms(); ++j) {
      if (x.atom(i).element != y.atom(j).element)
        continue;
      const int s =
          center_score(ctx.source_branches(i), ctx.target_branches(j));
      const int best = t.best_mapped[i];
      if (best < 0 || s > t.raw[i] || (s == t.raw[i] && yr[j] < yr[best])) {
        t.raw[i] = s;
        t.best_mapped[i] = j;
      }
    }
  }

  t.normalized.assign(x.num_atoms(), 0.0);
  if (!t.raw.empty()) {
    const int top = *std::max_element(t.raw.begin(), t.raw.end());
    double total = 0;
    for (int i = 0; i < x.num_atoms(); ++i) {
      t.normalized[i] = std::exp(static_cast<double>(t.raw[i] - top));
      total += t.normalized[i];
    }
    for (double &p: t.normalized)
      p /= total;
  }
  return t;
}

CenterScoreTable center_distribution(const MolGraph &x, const MolGraph &y) {
  return center_distribution(PairContext(x, y));
}

CenterPair locate_center(const PairContext &ctx, const CenterScoreTable &t) {
  const std::vector<int> &xr = ctx.source_ranks();
  int best = -1;
  for (int i = 0; i < static_cast<int>(t.raw.size()); ++i) {
    if (t.best_mapped[i] < 0)
      continue;
    if (best < 0 || t.raw[i] > t.raw[best]
        || (t.raw[i] == t.raw[best] && xr[i] < xr[best]))
      best = i;
  }
  if (best < 0)
    throw NoCandidate("source and target share no element");
  return { best, t.best_mapped[best] };
}

CenterPair locate_center(const MolGraph &x, const MolGraph &y) {
  const PairContext ctx(x, y);
  return locate_center(ctx, center_distribution(ctx));
}

int PolishAnnotation::preserved_atoms() const {
  int total = 0;
  for (const BranchMatch &m: preserved)
    total += source_branches.branches[m.x].size();
  return total;
}

int PolishAnnotation::removed_atoms() const {
  int total = 0;
  for (int k: removed)
    total += source_branches.branches[k].size();
  return total;
}

int PolishAnnotation::added_atoms() const {
  int total = 0;
  for (int k: added)
    total += target_branches.branches[k].size();
  return total;
}

PolishAnnotation annotate_pair(const MolGraph &x, const MolGraph &y) {
  const PairContext ctx(x, y);
  PolishAnnotation ann;
  ann.scores = center_distribution(ctx);
  const CenterPair c = locate_center(ctx, ann.scores);
  ann.center = c.center;
  ann.mapped_center = c.mapped_center;
  ann.source_branches = ctx.source_branches(c.center);
  ann.target_branches = ctx.target_branches(c.mapped_center);
  ann.preserved = match_branches(ann.source_branches, ann.target_branches);
  ann.center_atom = x.atom(c.center);
  ann.mapped_atom = y.atom(c.mapped_center);
  ann.source_atoms = x.num_atoms();
  ann.target_atoms = y.num_atoms();

  std::vector<bool> used_x(ann.source_branches.branches.size(), false);
  std::vector<bool> used_y(ann.target_branches.branches.size(), false);
  for (const BranchMatch &m: ann.preserved) {
    used_x[m.x] = true;
    used_y[m.y] = true;
  }
  for (std::size_t k = 0; k < used_x.size(); ++k) {
    if (!used_x[k])
      ann.removed.push_back(static_cast<int>(k));
  }
  for (std::size_t k = 0; k < used_y.size(); ++k) {
    if (!used_y[k])
      ann.added.push_back(static_cast<int>(k));
  }
  return ann;
}

MolGraph reconstruct(const PolishAnnotation &ann, const AtomSpec &center_atom) {
  std::vector<AttachPart> parts;
  for (const BranchMatch &m: ann.preserved) {
    const Branch &b = ann.source_branches.branches[m.x];
    parts.push_back({ &b.fragment, b.anchors });
  }
  for (int k: ann.added) {
    const Branch &b = ann.target_branches.branches[k];
    parts.push_back({ &b.fragment, b.anchors });
  }
  return merge_disjoint(center_atom, parts);
}

CorpusStats corpus_stats(std::span<const PolishAnnotation> annotations) {
  CorpusStats stats;
  for (const PolishAnnotation &ann: annotations) {
    stats.pairs.push_back({ ann.source_atoms, ann.target_atoms,
                            ann.preserved_atoms(), ann.removed_atoms(),
                            ann.added_atoms() });
  }
  if (stats.pairs.empty())
    return stats;
  for (const PairScale &p: stats.pairs) {
    stats.mean_preserved += p.preserved_atoms;
    stats.mean_removed += p.removed_atoms;
    stats.mean_added += p.added_atoms;
    stats.mean_source_atoms += p.source_atoms;
    stats.mean_target_atoms += p.target_atoms;
  }
  const double n = static_cast<double>(stats.pairs.size());
  stats.mean_preserved /= n;
  stats.mean_removed /= n;
  stats.mean_added /= n;
  stats.mean_source_atoms /= n;
  stats.mean_target_atoms /= n;
  return stats;
}

}  // namespace polish

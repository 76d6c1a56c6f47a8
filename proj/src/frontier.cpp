#include "cpctl/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cpctl {

bool dominates(const FrontierPoint& p, const FrontierPoint& q) {
    if (p.mu.size() != q.mu.size() || p.nu.size() != q.nu.size())
        throw std::invalid_argument("dominates: dimension mismatch");
    for (size_t i = 0; i < p.mu.size(); ++i)
        if (p.mu[i] < q.mu[i]) return false;
    for (size_t j = 0; j < p.nu.size(); ++j)
        if (p.nu[j] < q.nu[j]) return false;
    return true;
}

namespace {

// Canonical order: descending lexicographic on (nu, mu). Sorting before the
// epsilon-thinning pass makes the output a function of the input *set*.
bool canonicalLess(const PointPtr& a, const PointPtr& b) {
    if (a->nu != b->nu) return a->nu > b->nu;
    return a->mu > b->mu;
}

double linfNu(const FrontierPoint& a, const FrontierPoint& b) {
    double d = 0.0;
    for (size_t j = 0; j < a.nu.size(); ++j) d = std::max(d, std::abs(a.nu[j] - b.nu[j]));
    for (size_t i = 0; i < a.mu.size(); ++i)
        if (a.mu[i] != b.mu[i]) d = std::max(d, 1.0);
    return d;
}

}  // namespace

std::vector<PointPtr> pruneMaximal(const std::vector<PointPtr>& points, const PruneConfig& cfg) {
    // Exact dominance filter; earlier points win ties so established points
    // (and their witnesses) survive when a newcomer merely equals them.
    std::vector<PointPtr> maximal;
    for (const PointPtr& p : points) {
        bool covered = false;
        for (const PointPtr& q : maximal) {
            if (dominates(*q, *p)) {
                covered = true;
                break;
            }
        }
        if (covered) continue;
        maximal.erase(std::remove_if(maximal.begin(), maximal.end(),
                                     [&](const PointPtr& q) { return dominates(*p, *q); }),
                      maximal.end());
        maximal.push_back(p);
    }

    std::stable_sort(maximal.begin(), maximal.end(), canonicalLess);

    // Epsilon-thinning: drop p when a kept q is within epsilon below it on nu
    // and at least as good on mu.
    std::vector<PointPtr> thinned;
    for (const PointPtr& p : maximal) {
        bool close = false;
        for (const PointPtr& q : thinned) {
            bool cov = true;
            for (size_t i = 0; i < p->mu.size() && cov; ++i)
                if (q->mu[i] < p->mu[i]) cov = false;
            for (size_t j = 0; j < p->nu.size() && cov; ++j)
                if (q->nu[j] < p->nu[j] - cfg.epsilon) cov = false;
            if (cov) {
                close = true;
                break;
            }
        }
        if (!close) thinned.push_back(p);
    }

    if (static_cast<int>(thinned.size()) <= cfg.maxPointsPerState) return thinned;

    // Over the cap: keep each single-coordinate maximizer, then fill by
    // farthest-point selection in L-infinity on nu.
    std::vector<bool> taken(thinned.size(), false);
    std::vector<PointPtr> kept;
    size_t pf = thinned[0]->nu.size();
    for (size_t j = 0; j < pf && static_cast<int>(kept.size()) < cfg.maxPointsPerState; ++j) {
        size_t best = thinned.size();
        for (size_t i = 0; i < thinned.size(); ++i) {
            if (taken[i]) continue;
            if (best == thinned.size() || thinned[i]->nu[j] > thinned[best]->nu[j]) best = i;
        }
        if (best < thinned.size()) {
            taken[best] = true;
            kept.push_back(thinned[best]);
        }
    }
    while (static_cast<int>(kept.size()) < cfg.maxPointsPerState) {
        size_t best = thinned.size();
        double bestDist = -1.0;
        for (size_t i = 0; i < thinned.size(); ++i) {
            if (taken[i]) continue;
            double d = 1e300;
            for (const PointPtr& k : kept) d = std::min(d, linfNu(*thinned[i], *k));
            if (d > bestDist) {
                bestDist = d;
                best = i;
            }
        }
        if (best == thinned.size()) break;
        taken[best] = true;
        kept.push_back(thinned[best]);
    }
    std::stable_sort(kept.begin(), kept.end(), canonicalLess);
    return kept;
}

std::vector<Candidate> mixCandidates(const Mdp& m, int state, const std::vector<Candidate>& cands,
                                     int wMix) {
    std::vector<Candidate> out;
    if (wMix < 1 || cands.size() < 2) return out;
    const auto& actions = m.states[static_cast<size_t>(state)].actions;
    size_t pf = cands[0].u.size();

    for (size_t i = 0; i < cands.size(); ++i) {
        for (size_t j = i + 1; j < cands.size(); ++j) {
            if (cands[i].delta == cands[j].delta) continue;
            // Interior grid weights only: w = 0 and w = 1 reproduce the
            // originals, which are already in the candidate pool.
            for (int k = 1; k < wMix; ++k) {
                double w = static_cast<double>(k) / static_cast<double>(wMix);
                Candidate c;
                c.delta.resize(actions.size());
                for (size_t a = 0; a < actions.size(); ++a)
                    c.delta[a] = w * cands[i].delta[a] + (1.0 - w) * cands[j].delta[a];

                const Candidate& heavy = (w >= 0.5) ? cands[i] : cands[j];
                const Candidate& light = (w >= 0.5) ? cands[j] : cands[i];
                std::map<int, PointPtr> asn;
                for (const auto& [s, p] : light.assign) asn[s] = p;
                for (const auto& [s, p] : heavy.assign) asn[s] = p;
                c.assign.assign(asn.begin(), asn.end());

                std::map<int, double> pd;
                for (size_t a = 0; a < actions.size(); ++a) {
                    if (c.delta[a] == 0.0) continue;
                    for (auto [succ, p] : actions[a].to) pd[succ] += c.delta[a] * p;
                }
                c.u.assign(pf, 0.0);
                for (const auto& [succ, p] : pd) {
                    const PointPtr& pt = asn.at(succ);
                    for (size_t x = 0; x < pf; ++x) c.u[x] += p * pt->nu[x];
                }
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

}  // namespace cpctl

#include "cubulate/word_problem.hpp"

#include "items.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <random>
#include <unordered_set>

namespace cubulate {

using detail::EssGapView;
using detail::Item;
using detail::cyclic_view;
using detail::from_items;
using detail::normalize_items;

// ---------------------------------------------------------------------------
// Pseudometrics

PseudometricChoice PseudometricChoice::uniform(const StaggeredComplex& x, VertexMetricMode m, int depth) {
    PseudometricChoice pm;
    pm.mode_per_factor.assign(x.graph.factors.size(), m);
    pm.horoball_depth = depth;
    return pm;
}

long long horoball_level0_distance(long long d, int depth) {
    if (d <= 0) return 0;
    long long best = d;  // level-0 walk
    long long span = 1;
    for (int j = 1; j <= depth; ++j) {
        span *= 2;
        long long hops = (d + span - 1) / span;
        best = std::min(best, 2LL * j + hops);
    }
    return best;
}

long long PseudometricChoice::syllable_value(int factor, long long d) const {
    switch (mode(factor)) {
        case VertexMetricMode::Intrinsic: return d;
        case VertexMetricMode::Zero: return 0;
        case VertexMetricMode::Coned: return d > 0 ? 1 : 0;
        case VertexMetricMode::Horoball:
            if (horoball_depth < 0)
                throw Error("horoball pseudometric requested without a depth context");
            return horoball_level0_distance(d, horoball_depth);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Lengths

int bs_length(const StaggeredComplex& x, const Word& w) {
    int k = 0;
    for (Letter l : w.letters) k += x.graph.is_essential(l) ? 1 : 0;
    return k;
}

long long relative_length(const StaggeredComplex& x, const Word& w, const PseudometricChoice& pm) {
    long long total = 0;
    for (const Item& it : normalize_items(x.graph, w)) {
        if (it.essential) total += 1;
        else total += pm.syllable_value(it.factor, static_cast<long long>(it.body.size()));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Dehn rewriting

namespace {

struct AttachCycle {
    int relator;
    int direction;
    EssGapView view;
};

std::vector<AttachCycle> attach_cycles(const StaggeredComplex& x) {
    std::vector<AttachCycle> out;
    for (std::size_t r = 0; r < x.relators.size(); ++r) {
        for (int dir : {+1, -1}) {
            Word w = dir > 0 ? x.relators[r].attaching : x.relators[r].attaching.inverse();
            out.push_back({static_cast<int>(r), dir, cyclic_view(x.graph, normalize_items(x.graph, w))});
        }
    }
    return out;
}

struct Match {
    int cycle_index = -1;
    int j0 = 0;  // offset into the attach cycle
    int i0 = 0;  // offset into the word's essential sequence
    int len = 0; // matched essential letters
};

// Longest run of the cycle found in the word starting at (i0, j0).
int match_length(const EssGapView& wv, const EssGapView& rv, std::size_t i0, std::size_t j0, bool cyclic) {
    const std::size_t ew = wv.size();
    const std::size_t er = rv.size();
    std::size_t s = 0;
    while (s < er && s < ew) {
        std::size_t wi = cyclic ? (i0 + s) % ew : i0 + s;
        if (!cyclic && wi >= ew) break;
        std::size_t rj = (j0 + s) % er;
        if (wv.ess[wi] != rv.ess[rj]) break;
        if (s > 0) {
            std::size_t wg = cyclic ? (i0 + s - 1) % ew : i0 + s - 1;
            std::size_t rg = (j0 + s - 1) % er;
            if (wv.gap[wg] != rv.gap[rg]) break;  // normalized, so letter equality is group equality
        }
        ++s;
    }
    return static_cast<int>(s);
}

// Inverse of the unmatched arc of the cycle: the replacement word.
Word complement_word(const EssGapView& rv, std::size_t j0, std::size_t s) {
    const std::size_t er = rv.size();
    Word rest;
    auto push_gap = [&](std::size_t idx) {
        const auto& g = rv.gap[idx % er];
        rest.letters.insert(rest.letters.end(), g.begin(), g.end());
    };
    push_gap(j0 + s - 1);
    for (std::size_t k = s; k < er; ++k) {
        rest.letters.push_back(rv.ess[(j0 + k) % er]);
        push_gap(j0 + k);
    }
    return rest.inverse();
}

} // namespace

std::optional<std::pair<Word, DehnEvent>> dehn_step(const StaggeredComplex& x, const Word& w, bool cyclic) {
    if (x.relators.empty()) return std::nullopt;
    cyclic = cyclic && is_closed(x.graph, w);
    std::vector<Item> items = cyclic ? normalize_items(x.graph, cyclic_reduce(x, w))
                                     : normalize_items(x.graph, w);
    bool has_ess = false;
    for (const Item& it : items) has_ess |= it.essential;
    if (!has_ess) return std::nullopt;

    EssGapView wv;
    std::vector<std::vector<Letter>> lead_tail;  // linear mode: gap before first / after last essential
    if (cyclic) {
        wv = cyclic_view(x.graph, items);
    } else {
        // Linear view: leading and trailing syllables are kept aside.
        std::vector<Letter> lead, tail;
        std::size_t first = 0, last = items.size();
        while (first < items.size() && !items[first].essential) {
            lead.insert(lead.end(), items[first].body.begin(), items[first].body.end());
            ++first;
        }
        while (last > first && !items[last - 1].essential) {
            --last;
            tail.insert(tail.begin(), items[last].body.begin(), items[last].body.end());
        }
        for (std::size_t i = first; i < last; ++i) {
            if (items[i].essential) {
                wv.ess.push_back(items[i].letter);
                wv.gap.emplace_back();
                wv.gap_factor.push_back(-1);
            } else {
                wv.gap.back() = items[i].body;
                wv.gap_factor.back() = items[i].factor;
            }
        }
        lead_tail = {lead, tail};
    }

    static thread_local const StaggeredComplex* cached_for = nullptr;
    static thread_local std::vector<AttachCycle> cycles;
    if (cached_for != &x) {
        cycles = attach_cycles(x);
        cached_for = &x;
    }

    Match best;
    const std::size_t ew = wv.size();
    for (std::size_t ci = 0; ci < cycles.size(); ++ci) {
        const EssGapView& rv = cycles[ci].view;
        const std::size_t er = rv.size();
        for (std::size_t i0 = 0; i0 < ew; ++i0) {
            for (std::size_t j0 = 0; j0 < er; ++j0) {
                int s = match_length(wv, rv, i0, j0, cyclic);
                if (2 * s > static_cast<int>(er) && s > best.len) {
                    best = {static_cast<int>(ci), static_cast<int>(j0), static_cast<int>(i0), s};
                }
            }
        }
    }
    if (best.len == 0) return std::nullopt;

    const AttachCycle& cyc = cycles[static_cast<std::size_t>(best.cycle_index)];
    const EssGapView& rv = cyc.view;
    Word replacement = complement_word(rv, static_cast<std::size_t>(best.j0),
                                       static_cast<std::size_t>(best.len));

    Word result;
    if (cyclic) {
        // Rebuild starting right after the matched arc, then prepend the replacement.
        result = replacement;
        for (std::size_t k = static_cast<std::size_t>(best.len); k < ew + 1; ++k) {
            std::size_t gi = (static_cast<std::size_t>(best.i0) + k - 1) % ew;
            const auto& g = wv.gap[gi];
            result.letters.insert(result.letters.end(), g.begin(), g.end());
            if (k < ew) result.letters.push_back(wv.ess[(static_cast<std::size_t>(best.i0) + k) % ew]);
        }
    } else {
        const auto& lead = lead_tail[0];
        const auto& tail = lead_tail[1];
        result.letters.insert(result.letters.end(), lead.begin(), lead.end());
        for (int k = 0; k < best.i0; ++k) {
            result.letters.push_back(wv.ess[static_cast<std::size_t>(k)]);
            const auto& g = wv.gap[static_cast<std::size_t>(k)];
            result.letters.insert(result.letters.end(), g.begin(), g.end());
        }
        result.letters.insert(result.letters.end(), replacement.letters.begin(), replacement.letters.end());
        for (std::size_t k = static_cast<std::size_t>(best.i0 + best.len); k < ew; ++k) {
            const auto& g = wv.gap[k - 1];
            result.letters.insert(result.letters.end(), g.begin(), g.end());
            result.letters.push_back(wv.ess[k]);
        }
        result.letters.insert(result.letters.end(), tail.begin(), tail.end());
    }

    DehnEvent ev;
    ev.relator = cyc.relator;
    ev.direction = cyc.direction;
    ev.rotation = best.j0;
    ev.matched_essential = best.len;
    ev.replaced_essential = static_cast<int>(rv.size()) - best.len;
    ev.before = cyclic ? cyclic_reduce(x, w) : normalize(x, w);
    ev.after = cyclic ? cyclic_reduce(x, result) : normalize(x, result);
    return std::make_pair(ev.after, ev);
}

Word path_normal_form(const StaggeredComplex& x, const Word& w) {
    Word cur = normalize(x, w);
    for (int guard = 0; guard < 100000; ++guard) {
        auto step = dehn_step(x, cur, /*cyclic=*/false);
        if (!step) return cur;
        cur = step->first;
    }
    throw Error("path_normal_form: rewrite loop failed to terminate");
}

// ---------------------------------------------------------------------------
// Triviality: greedy loop

namespace {

bool is_trivial_dehn(const StaggeredComplex& x, const Word& w, DehnTrace* trace) {
    Word cur = cyclic_reduce(x, w);
    if (trace) {
        trace->input = w;
        trace->events.clear();
    }
    for (int guard = 0; guard < 100000; ++guard) {
        if (cur.empty()) {
            if (trace) trace->output = cur;
            return true;
        }
        auto step = dehn_step(x, cur, /*cyclic=*/true);
        if (!step) {
            if (trace) trace->output = cur;
            return false;
        }
        // Each rewrite must strictly shorten the word in essential letters.
        assert(bs_length(x, step->first) < bs_length(x, cur));
        cur = step->first;
        if (trace) trace->events.push_back(step->second);
    }
    throw Error("is_trivial: rewrite loop failed to terminate");
}

// ---------------------------------------------------------------------------
// Triviality: bounded splice search
//
// States are cyclic normal forms; moves splice a rotated relator cycle (or
// its inverse) at an item boundary. A hit on the empty word certifies
// triviality. Exhausting every state of length <= radius is reported as
// nontrivial: any rewrite sequence whose intermediate normal forms fit in
// the corridor would have been found, so this is a strictly more complete
// search than the greedy loop at equal radius.

struct SpliceVariant {
    std::vector<Letter> letters;
    int base_factor;  // factor at which the spliced loop starts
};

std::vector<SpliceVariant> splice_variants(const StaggeredComplex& x) {
    std::vector<SpliceVariant> out;
    std::unordered_set<std::string> seen;
    for (const Relator& r : x.relators) {
        for (int dir : {+1, -1}) {
            Word w = dir > 0 ? r.attaching : r.attaching.inverse();
            const std::size_t n = w.size();
            for (std::size_t rot = 0; rot < n; ++rot) {
                std::vector<Letter> v(w.letters.begin() + static_cast<std::ptrdiff_t>(rot), w.letters.end());
                v.insert(v.end(), w.letters.begin(), w.letters.begin() + static_cast<std::ptrdiff_t>(rot));
                Word cand{v};
                if (!seen.insert(cand.key()).second) continue;
                out.push_back({cand.letters, x.graph.letter_source(cand.letters.front())});
            }
        }
    }
    return out;
}

bool is_trivial_oracle(const StaggeredComplex& x, const Word& w, int radius, std::size_t state_budget) {
    Word start = cyclic_reduce(x, w);
    if (start.empty()) return true;
    if (static_cast<int>(start.size()) > radius)
        throw InconclusiveError("oracle radius " + std::to_string(radius) +
                                " below the word's cyclic normal form length " +
                                std::to_string(start.size()));
    if (x.relators.empty()) return false;

    const auto variants = splice_variants(x);
    std::unordered_set<std::string> visited;
    std::deque<Word> queue;
    visited.insert(start.key());
    queue.push_back(start);

    while (!queue.empty()) {
        Word cur = queue.front();
        queue.pop_front();
        auto items = normalize_items(x.graph, cur);
        // Splice positions are item boundaries; rotating the state is free, so
        // positions inside syllables add nothing.
        std::vector<int> boundary_factor(items.size());
        for (std::size_t b = 0; b < items.size(); ++b) {
            const Item& it = items[b];
            boundary_factor[b] = it.essential ? x.graph.letter_source(it.letter) : it.factor;
        }
        for (std::size_t b = 0; b < items.size(); ++b) {
            for (const SpliceVariant& v : variants) {
                if (v.base_factor != boundary_factor[b]) continue;
                Word next;
                next.letters.reserve(cur.size() + v.letters.size());
                for (std::size_t i = 0; i < b; ++i) {
                    const Item& it = items[i];
                    if (it.essential) next.letters.push_back(it.letter);
                    else next.letters.insert(next.letters.end(), it.body.begin(), it.body.end());
                }
                next.letters.insert(next.letters.end(), v.letters.begin(), v.letters.end());
                for (std::size_t i = b; i < items.size(); ++i) {
                    const Item& it = items[i];
                    if (it.essential) next.letters.push_back(it.letter);
                    else next.letters.insert(next.letters.end(), it.body.begin(), it.body.end());
                }
                Word reduced = cyclic_reduce(x, next);
                if (reduced.empty()) return true;
                if (static_cast<int>(reduced.size()) > radius) continue;
                if (visited.insert(reduced.key()).second) {
                    if (visited.size() > state_budget)
                        throw InconclusiveError("oracle state budget exhausted at radius " +
                                                std::to_string(radius));
                    queue.push_back(reduced);
                }
            }
        }
    }
    return false;
}

} // namespace

bool verify_trace(const StaggeredComplex& x, const DehnTrace& t) {
    Word cur = cyclic_reduce(x, t.input);
    for (const DehnEvent& ev : t.events) {
        if (ev.before != cur) return false;
        auto step = dehn_step(x, cur, /*cyclic=*/true);
        if (!step) return false;
        if (step->second.after != ev.after) return false;
        cur = step->first;
    }
    return cur == t.output && (t.events.empty() || cur == t.events.back().after);
}

bool is_trivial(const StaggeredComplex& x, const Word& w, const TrivialityOptions& opts) {
    if (!is_closed(x.graph, w)) throw Error("is_trivial: word is not a closed path");
    switch (opts.mode) {
        case TrivialityMode::Dehn:
            return is_trivial_dehn(x, w, opts.trace_out);
        case TrivialityMode::Oracle: {
            if (opts.oracle_radius <= 0) throw Error("oracle mode requires a radius bound");
            return is_trivial_oracle(x, w, opts.oracle_radius, 4000000);
        }
        case TrivialityMode::CrossCheck: {
            DehnTrace local;
            DehnTrace* tr = opts.trace_out ? opts.trace_out : &local;
            bool dehn = is_trivial_dehn(x, w, tr);
            int radius = opts.oracle_radius;
            int trace_max = static_cast<int>(cyclic_reduce(x, w).size());
            for (const DehnEvent& ev : tr->events)
                trace_max = std::max(trace_max, static_cast<int>(ev.before.size()));
            radius = std::max(radius, trace_max);
            if (radius <= 0) throw Error("cross-check mode requires a radius bound");
            bool oracle = is_trivial_oracle(x, w, radius, 4000000);
            if (dehn != oracle) {
                std::string detail = dehn ? "greedy loop reduced the word but the splice search did not"
                                          : "splice search certified a trivial word the greedy loop missed";
                throw CrossCheckError("word problem cross-check mismatch on '" +
                                      word_to_string(x.graph, w) + "': " + detail +
                                      "; residue '" + word_to_string(x.graph, tr->output) + "'");
            }
            return dehn;
        }
    }
    return false;
}

bool are_equal(const StaggeredComplex& x, const Word& u, const Word& v, const TrivialityOptions& opts) {
    if (u.empty() && v.empty()) return true;
    Word w = u * v.inverse();
    if (!is_valid_path(x.graph, w) || !is_closed(x.graph, w))
        throw Error("are_equal: words do not share endpoints");
    return is_trivial(x, w, opts);
}

int area_estimate(const StaggeredComplex& x, const Word& w, const TrivialityOptions& opts) {
    TrivialityOptions o = opts;
    DehnTrace trace;
    o.trace_out = &trace;
    if (!is_trivial(x, w, o)) throw Error("area_estimate: word is not trivial");
    return static_cast<int>(trace.events.size());
}

// ---------------------------------------------------------------------------
// Quick sound triviality certificates

AbelianizationLattice::AbelianizationLattice(const StaggeredComplex& x) {
    dim_ = static_cast<int>(x.graph.symbols.size()) - 1;
    auto exponent_vector = [&](const Word& w) {
        std::vector<long long> v(static_cast<std::size_t>(dim_), 0);
        for (Letter l : w.letters) v[static_cast<std::size_t>(std::abs(l) - 1)] += l > 0 ? 1 : -1;
        return v;
    };
    // Row-style Hermite reduction; dimensions here are tiny.
    auto pivot = [](const std::vector<long long>& v) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] != 0) return static_cast<int>(i);
        return -1;
    };
    for (const Relator& r : x.relators) {
        std::vector<long long> v = exponent_vector(r.attaching);
        bool placed = false;
        while (!placed) {
            int p = pivot(v);
            if (p < 0) break;
            bool merged = false;
            for (auto& b : basis_) {
                if (pivot(b) != p) continue;
                // gcd-combine b and v at the pivot
                while (v[static_cast<std::size_t>(p)] != 0) {
                    long long q = b[static_cast<std::size_t>(p)] / v[static_cast<std::size_t>(p)];
                    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= q * v[i];
                    std::swap(b, v);
                }
                merged = true;
                break;
            }
            if (!merged) {
                if (v[static_cast<std::size_t>(p)] < 0)
                    for (auto& c : v) c = -c;
                basis_.push_back(v);
                placed = true;
            }
        }
    }
    std::sort(basis_.begin(), basis_.end(), [&](const auto& a, const auto& b) { return pivot(a) < pivot(b); });
}

bool AbelianizationLattice::in_lattice(const StaggeredComplex& x, const Word& w) const {
    std::vector<long long> v(static_cast<std::size_t>(dim_), 0);
    for (Letter l : w.letters) v[static_cast<std::size_t>(std::abs(l) - 1)] += l > 0 ? 1 : -1;
    (void)x;
    for (const auto& b : basis_) {
        int p = -1;
        for (std::size_t i = 0; i < b.size(); ++i)
            if (b[i] != 0) { p = static_cast<int>(i); break; }
        if (p < 0) continue;
        if (v[static_cast<std::size_t>(p)] % b[static_cast<std::size_t>(p)] != 0) return false;
        long long q = v[static_cast<std::size_t>(p)] / b[static_cast<std::size_t>(p)];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= q * b[i];
    }
    for (long long c : v)
        if (c != 0) return false;
    return true;
}

QuickTriviality quick_triviality(const StaggeredComplex& x, const AbelianizationLattice& ab, const Word& w) {
    Word c = cyclic_reduce(x, w);
    if (c.empty()) return QuickTriviality::Trivial;
    int bs = bs_length(x, c);
    // A word in a single vertex space is nontrivial unless it normalizes away:
    // vertex spaces inject.
    if (bs == 0) return QuickTriviality::Nontrivial;
    if (x.relators.empty()) return QuickTriviality::Nontrivial;
    // A trivial word must meet more than half of some relator's essential
    // letters along its boundary.
    int min_ess = -1;
    for (const Relator& r : x.relators) {
        int e = bs_length(x, r.attaching);
        if (min_ess < 0 || e < min_ess) min_ess = e;
    }
    if (2 * bs <= min_ess) return QuickTriviality::Nontrivial;
    if (!ab.in_lattice(x, c)) return QuickTriviality::Nontrivial;
    return QuickTriviality::Unknown;
}

// ---------------------------------------------------------------------------
// Seeded trivial-word corpus

namespace {

// Shortest edge-letter path between two factors in the underlying graph.
Word connecting_path(const GraphOfSpaces& g, int from, int to) {
    if (from == to) return Word{};
    std::vector<int> prev_factor(g.factors.size(), -1);
    std::vector<Letter> prev_letter(g.factors.size(), 0);
    std::deque<int> q{from};
    prev_factor[static_cast<std::size_t>(from)] = from;
    while (!q.empty()) {
        int f = q.front();
        q.pop_front();
        if (f == to) break;
        for (const EssentialEdge& e : g.edges) {
            int sym = e.symbol;
            if (e.from_factor == f && prev_factor[static_cast<std::size_t>(e.to_factor)] < 0) {
                prev_factor[static_cast<std::size_t>(e.to_factor)] = f;
                prev_letter[static_cast<std::size_t>(e.to_factor)] = sym;
                q.push_back(e.to_factor);
            }
            if (e.to_factor == f && prev_factor[static_cast<std::size_t>(e.from_factor)] < 0) {
                prev_factor[static_cast<std::size_t>(e.from_factor)] = f;
                prev_letter[static_cast<std::size_t>(e.from_factor)] = -sym;
                q.push_back(e.from_factor);
            }
        }
    }
    std::vector<Letter> rev;
    int f = to;
    while (f != from) {
        rev.push_back(prev_letter[static_cast<std::size_t>(f)]);
        f = prev_factor[static_cast<std::size_t>(f)];
    }
    std::reverse(rev.begin(), rev.end());
    return Word{rev};
}

} // namespace

std::vector<Word> make_trivial_words(const StaggeredComplex& x, const TrivialWordSpec& spec) {
    if (x.relators.empty()) throw Error("make_trivial_words: presentation has no relators");
    std::mt19937_64 rng(spec.seed);
    const GraphOfSpaces& g = x.graph;
    auto rand_int = [&](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(spec.count));
    while (static_cast<int>(out.size()) < spec.count) {
        int pieces = rand_int(1, spec.max_conjugates);
        Word w;
        for (int p = 0; p < pieces; ++p) {
            const Relator& r = x.relators[static_cast<std::size_t>(rand_int(0, static_cast<int>(x.relators.size()) - 1))];
            Word rel = rng() % 2 ? r.attaching : r.attaching.inverse();
            // Random walk from factor 0, then close up to the relator's base factor.
            int len = rand_int(0, spec.max_conjugator_length);
            Word u;
            int at = 0;
            for (int i = 0; i < len; ++i) {
                std::vector<Letter> options;
                for (std::size_t s = 1; s < g.symbols.size(); ++s) {
                    const Symbol& sym = g.symbols[s];
                    if (sym.kind == SymbolKind::Generator) {
                        if (sym.factor == at) {
                            options.push_back(static_cast<Letter>(s));
                            options.push_back(-static_cast<Letter>(s));
                        }
                    } else {
                        const EssentialEdge& e = g.edges[static_cast<std::size_t>(sym.edge)];
                        if (e.from_factor == at) options.push_back(static_cast<Letter>(s));
                        if (e.to_factor == at) options.push_back(-static_cast<Letter>(s));
                    }
                }
                Letter pick = options[static_cast<std::size_t>(rng() % options.size())];
                u.letters.push_back(pick);
                at = g.letter_target(pick);
            }
            int base = *start_factor(g, rel);
            Word bridge = connecting_path(g, at, base);
            Word conj = u * bridge;
            w = w * (conj * rel * conj.inverse());
        }
        out.push_back(w);
    }
    return out;
}

} // namespace cubulate

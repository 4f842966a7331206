#include "cubulate/ball.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace cubulate {

// ---------------------------------------------------------------------------
// Accessors

std::optional<int> BallComplex::neighbor(int v, Letter l) const {
    for (const auto& [letter, to] : adjacency_[static_cast<std::size_t>(v)])
        if (letter == l) return to;
    return std::nullopt;
}

int BallComplex::edge_between(int u, int v) const {
    for (const auto& [letter, to] : adjacency_[static_cast<std::size_t>(u)]) {
        if (to != v) continue;
        Letter pos = letter > 0 ? letter : -letter;
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const BallEdge& be = edges[e];
            if (be.letter != pos) continue;
            if ((be.from == u && be.to == v) || (be.from == v && be.to == u)) return static_cast<int>(e);
        }
    }
    return -1;
}

std::vector<std::pair<int, int>> BallComplex::cells_through_edge(int edge) const {
    return edge_cells_[static_cast<std::size_t>(edge)];
}

const std::vector<int>& BallComplex::squares_through_edge(int edge) const {
    return edge_squares_[static_cast<std::size_t>(edge)];
}

const std::vector<int>& BallComplex::distances_from(int v) const {
    auto it = dist_cache_.find(v);
    if (it != dist_cache_.end()) return it->second;
    std::vector<int> dist(vertices.size(), -1);
    std::deque<int> q{v};
    dist[static_cast<std::size_t>(v)] = 0;
    while (!q.empty()) {
        int cur = q.front();
        q.pop_front();
        for (const auto& [l, to] : adjacency_[static_cast<std::size_t>(cur)]) {
            (void)l;
            if (dist[static_cast<std::size_t>(to)] < 0) {
                dist[static_cast<std::size_t>(to)] = dist[static_cast<std::size_t>(cur)] + 1;
                q.push_back(to);
            }
        }
    }
    return dist_cache_.emplace(v, std::move(dist)).first->second;
}

bool BallComplex::pair_is_safe(int u, int v) const {
    int d = distance(u, v);
    if (d < 0) return false;
    int du = vertices[static_cast<std::size_t>(u)].depth;
    int dv = vertices[static_cast<std::size_t>(v)].depth;
    return std::min(du, dv) + d <= radius;
}

// ---------------------------------------------------------------------------
// Builder

namespace {

struct Identifier {
    const StaggeredComplex& x;
    const BallOptions& opts;
    AbelianizationLattice ab;
    std::unordered_map<std::string, int> by_label;
    std::vector<std::vector<int>> by_depth_factor;  // depth * F + factor -> vertex ids
    int factor_count;

    Identifier(const StaggeredComplex& cx, const BallOptions& o)
        : x(cx), opts(o), ab(cx), factor_count(static_cast<int>(cx.graph.factors.size())) {}

    void index(int id, const BallVertex& v) {
        by_label.emplace(v.label, id);
        std::size_t slot = static_cast<std::size_t>(v.depth * factor_count + v.factor);
        if (by_depth_factor.size() <= slot) by_depth_factor.resize(slot + 1);
        by_depth_factor[slot].push_back(id);
    }

    bool same_element(const std::vector<BallVertex>& vertices, int candidate_id_unused, const Word& w,
                      int existing) {
        (void)candidate_id_unused;
        const Word& u = vertices[static_cast<std::size_t>(existing)].word;
        Word diff = w * u.inverse();
        switch (quick_triviality(x, ab, diff)) {
            case QuickTriviality::Trivial: return true;
            case QuickTriviality::Nontrivial: return false;
            case QuickTriviality::Unknown: break;
        }
        TrivialityOptions to;
        to.mode = opts.checked_identification ? TrivialityMode::CrossCheck : TrivialityMode::Dehn;
        to.oracle_radius = opts.oracle_radius;
        return is_trivial(x, diff, to);
    }

    // Returns the id of the vertex equal to w, or -1.
    int find(const std::vector<BallVertex>& vertices, const Word& w, const std::string& label, int factor,
             int depth) {
        auto hit = by_label.find(label);
        if (hit != by_label.end()) return hit->second;
        for (int d = std::max(0, depth - 2); d <= depth; ++d) {
            std::size_t slot = static_cast<std::size_t>(d * factor_count + factor);
            if (slot >= by_depth_factor.size()) continue;
            for (int id : by_depth_factor[slot])
                if (same_element(vertices, -1, w, id)) return id;
        }
        return -1;
    }
};

std::vector<Letter> letters_at(const GraphOfSpaces& g, int factor) {
    std::vector<Letter> out;
    for (std::size_t s = 1; s < g.symbols.size(); ++s) {
        const Symbol& sym = g.symbols[s];
        if (sym.kind == SymbolKind::Generator) {
            if (sym.factor == factor) {
                out.push_back(static_cast<Letter>(s));
                out.push_back(-static_cast<Letter>(s));
            }
        } else {
            const EssentialEdge& e = g.edges[static_cast<std::size_t>(sym.edge)];
            if (e.from_factor == factor) out.push_back(static_cast<Letter>(s));
            if (e.to_factor == factor) out.push_back(-static_cast<Letter>(s));
        }
    }
    return out;
}

} // namespace

BallComplex build_ball(const StaggeredComplex& x, int radius, const BallOptions& opts) {
    if (radius < 0) throw Error("build_ball: radius must be nonnegative");
    BallComplex b;
    b.complex = x;
    b.radius = radius;
    b.wx = x.max_attaching_length();

    const GraphOfSpaces& g = x.graph;
    Identifier ident(x, opts);

    BallVertex base;
    base.word = Word{};
    base.label = "";
    base.factor = 0;
    base.depth = 0;
    b.vertices.push_back(base);
    b.adjacency_.emplace_back();
    ident.index(0, b.vertices[0]);

    std::map<std::tuple<Letter, int, int>, int> edge_ids;  // (symbol, from, to) -> edge
    auto add_edge = [&](int from, int to, Letter l) {
        int cf = l > 0 ? from : to;
        int ct = l > 0 ? to : from;
        Letter sym = l > 0 ? l : -l;
        auto key = std::make_tuple(sym, cf, ct);
        auto it = edge_ids.find(key);
        if (it != edge_ids.end()) return it->second;
        BallEdge e;
        e.from = cf;
        e.to = ct;
        e.letter = sym;
        int id = static_cast<int>(b.edges.size());
        b.edges.push_back(e);
        edge_ids.emplace(key, id);
        b.adjacency_[static_cast<std::size_t>(cf)].push_back({sym, ct});
        b.adjacency_[static_cast<std::size_t>(ct)].push_back({-sym, cf});
        return id;
    };

    // Resolve (or create) the vertex reached from `from` by letter `l`.
    auto step_vertex = [&](int from, Letter l, bool create) -> int {
        const BallVertex& fv = b.vertices[static_cast<std::size_t>(from)];
        Word w = fv.word;
        w.letters.push_back(l);
        Word nf = path_normal_form(x, w);
        std::string label = nf.key();
        int factor = g.letter_target(l);
        int depth_hint = fv.depth + 1;
        int found = ident.find(b.vertices, nf, label, factor, depth_hint);
        if (found >= 0) return found;
        if (!create) return -1;
        BallVertex nv;
        nv.word = nf;
        nv.label = label;
        nv.factor = factor;
        nv.depth = depth_hint;
        int id = static_cast<int>(b.vertices.size());
        if (static_cast<long long>(id) > opts.max_vertices) throw Error("build_ball: vertex budget exceeded");
        b.vertices.push_back(nv);
        b.adjacency_.emplace_back();
        ident.index(id, b.vertices[static_cast<std::size_t>(id)]);
        return id;
    };

    // Breadth-first over the 1-skeleton.
    std::vector<int> frontier{0};
    for (int depth = 0; depth < radius; ++depth) {
        std::vector<int> next;
        for (int v : frontier) {
            for (Letter l : letters_at(g, b.vertices[static_cast<std::size_t>(v)].factor)) {
                int to = step_vertex(v, l, /*create=*/true);
                bool fresh = b.vertices[static_cast<std::size_t>(to)].depth == depth + 1 &&
                             std::find(next.begin(), next.end(), to) == next.end() &&
                             b.adjacency_[static_cast<std::size_t>(to)].empty();
                add_edge(v, to, l);
                if (fresh && b.vertices[static_cast<std::size_t>(to)].depth == depth + 1) next.push_back(to);
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        frontier = std::move(next);
    }
    // Edges among depth-R vertices: resolve neighbors without creating.
    for (std::size_t v = 0; v < b.vertices.size(); ++v) {
        if (b.vertices[v].depth != radius || radius == 0) continue;
        for (Letter l : letters_at(g, b.vertices[v].factor)) {
            int to = step_vertex(static_cast<int>(v), l, /*create=*/false);
            if (to >= 0) add_edge(static_cast<int>(v), to, l);
        }
    }

    // Vertex-space components: connectivity through generator edges.
    {
        std::vector<int> parent(b.vertices.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int a) {
            while (parent[static_cast<std::size_t>(a)] != a) {
                parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
                a = parent[static_cast<std::size_t>(a)];
            }
            return a;
        };
        for (const BallEdge& e : b.edges)
            if (g.is_generator(e.letter)) parent[static_cast<std::size_t>(find(e.from))] = find(e.to);
        std::map<int, int> renumber;
        for (std::size_t v = 0; v < b.vertices.size(); ++v) {
            int root = find(static_cast<int>(v));
            auto it = renumber.find(root);
            if (it == renumber.end()) it = renumber.emplace(root, static_cast<int>(renumber.size())).first;
            b.vertices[v].component = it->second;
        }
    }

    // Squares of free-abelian components.
    std::set<std::array<int, 5>> square_keys;
    for (std::size_t v = 0; v < b.vertices.size(); ++v) {
        int f = b.vertices[v].factor;
        const FactorSpec& fs = g.factors[static_cast<std::size_t>(f)];
        if (fs.kind != FactorKind::FreeAbelian) continue;
        for (int i = 0; i < fs.rank; ++i) {
            for (int j = i + 1; j < fs.rank; ++j) {
                Letter xi = static_cast<Letter>(g.symbol_of_generator(f, i));
                Letter xj = static_cast<Letter>(g.symbol_of_generator(f, j));
                auto c1 = b.neighbor(static_cast<int>(v), xi);
                auto c3 = b.neighbor(static_cast<int>(v), xj);
                if (!c1 || !c3) continue;
                auto c2 = b.neighbor(*c1, xj);
                if (!c2) continue;
                auto c2b = b.neighbor(*c3, xi);
                if (!c2b || *c2b != *c2) continue;
                std::array<int, 4> corners{static_cast<int>(v), *c1, *c2, *c3};
                std::array<int, 5> key{corners[0], corners[1], corners[2], corners[3], (i << 8) | j};
                int mn = *std::min_element(corners.begin(), corners.end());
                if (corners[0] != mn) continue;  // one representative per square
                if (!square_keys.insert(key).second) continue;
                BallSquare sq;
                sq.factor = f;
                sq.corners = corners;
                // e1 f1 e2^-1 f2^-1: v --xi--> c1 --xj--> c2 --xi^-1--> c3 --xj^-1--> v
                auto edge_of = [&](int a, int bb, Letter l) {
                    int cf = l > 0 ? a : bb;
                    int ct = l > 0 ? bb : a;
                    Letter sym = l > 0 ? l : -l;
                    return edge_ids.at(std::make_tuple(sym, cf, ct));
                };
                sq.boundary[0] = {edge_of(static_cast<int>(v), *c1, xi), 1};
                sq.boundary[1] = {edge_of(*c1, *c2, xj), 1};
                sq.boundary[2] = {edge_of(*c2, *c3, -xi), -1};
                sq.boundary[3] = {edge_of(*c3, static_cast<int>(v), -xj), -1};
                b.squares.push_back(sq);
            }
        }
    }

    // Essential cells: trace each relator's attaching cycle from every vertex.
    std::set<std::vector<int>> cell_keys;
    for (std::size_t v = 0; v < b.vertices.size(); ++v) {
        for (std::size_t r = 0; r < x.relators.size(); ++r) {
            const Relator& rel = x.relators[r];
            if (start_factor(g, rel.attaching).value_or(-1) != b.vertices[v].factor) continue;
            std::vector<CellOccurrence> occs;
            int cur = static_cast<int>(v);
            bool inside = true;
            for (Letter l : rel.attaching.letters) {
                auto to = b.neighbor(cur, l);
                if (!to) { inside = false; break; }
                CellOccurrence oc;
                oc.sign = l > 0 ? 1 : -1;
                Letter sym = l > 0 ? l : -l;
                oc.from_vertex = cur;
                oc.to_vertex = *to;
                int cf = l > 0 ? cur : *to;
                int ct = l > 0 ? *to : cur;
                oc.edge = edge_ids.at(std::make_tuple(sym, cf, ct));
                occs.push_back(oc);
                cur = *to;
            }
            if (!inside || cur != static_cast<int>(v)) continue;
            // Canonical key: least rotation of the directed boundary.
            std::vector<int> seq;
            for (const CellOccurrence& oc : occs) seq.push_back(oc.edge * 2 + (oc.sign > 0 ? 0 : 1));
            std::vector<int> best = seq;
            for (std::size_t rot = 1; rot < seq.size(); ++rot) {
                std::vector<int> cand(seq.begin() + static_cast<std::ptrdiff_t>(rot), seq.end());
                cand.insert(cand.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(rot));
                if (cand < best) best = cand;
            }
            if (!cell_keys.insert(best).second) continue;
            EssentialCellInstance cell;
            cell.relator = static_cast<int>(r);
            cell.exponent = rel.exponent;
            cell.period_length = static_cast<int>(rel.period.size());
            cell.base_vertex = static_cast<int>(v);
            cell.boundary = std::move(occs);
            for (Letter l : rel.attaching.letters) cell.essential_edge_count += g.is_essential(l) ? 1 : 0;
            b.cells.push_back(std::move(cell));
        }
    }

    // Incidence bookkeeping and edge completeness.
    b.edge_cells_.assign(b.edges.size(), {});
    b.edge_squares_.assign(b.edges.size(), {});
    for (std::size_t c = 0; c < b.cells.size(); ++c)
        for (std::size_t o = 0; o < b.cells[c].boundary.size(); ++o)
            b.edge_cells_[static_cast<std::size_t>(b.cells[c].boundary[o].edge)].push_back(
                {static_cast<int>(c), static_cast<int>(o)});
    for (std::size_t s = 0; s < b.squares.size(); ++s)
        for (const DirectedEdge& de : b.squares[s].boundary)
            b.edge_squares_[static_cast<std::size_t>(de.edge)].push_back(static_cast<int>(s));

    // Expected incidence counts per symbol, straight from the presentation.
    std::vector<int> cells_expected(g.symbols.size(), 0);
    for (const Relator& rel : x.relators)
        for (Letter l : rel.attaching.letters) cells_expected[static_cast<std::size_t>(std::abs(l))] += 1;
    std::vector<int> squares_expected(g.symbols.size(), 0);
    for (std::size_t s = 1; s < g.symbols.size(); ++s) {
        const Symbol& sym = g.symbols[s];
        if (sym.kind != SymbolKind::Generator) continue;
        const FactorSpec& f = g.factors[static_cast<std::size_t>(sym.factor)];
        if (f.kind == FactorKind::FreeAbelian) squares_expected[s] = 2 * (f.rank - 1);
    }
    for (std::size_t e = 0; e < b.edges.size(); ++e) {
        BallEdge& be = b.edges[e];
        be.cells_seen = static_cast<int>(b.edge_cells_[e].size());
        be.squares_seen = static_cast<int>(b.edge_squares_[e].size());
        be.complete = be.cells_seen == cells_expected[static_cast<std::size_t>(be.letter)] &&
                      be.squares_seen == squares_expected[static_cast<std::size_t>(be.letter)];
    }
    return b;
}

std::vector<int> position_class(const EssentialCellInstance& c, int occ) {
    if (occ < 0 || occ >= static_cast<int>(c.boundary.size()))
        throw Error("position_class: occurrence out of range");
    std::vector<int> out;
    int L = static_cast<int>(c.boundary.size());
    for (int j = 0; j < c.exponent; ++j) out.push_back((occ + j * c.period_length) % L);
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Geodesics

namespace {

DirectedEdge directed_edge_between(const BallComplex& b, int u, int v, Letter l) {
    Letter sym = l > 0 ? l : -l;
    int cf = l > 0 ? u : v;
    int ct = l > 0 ? v : u;
    for (std::size_t e = 0; e < b.edges.size(); ++e) {
        const BallEdge& be = b.edges[e];
        if (be.letter == sym && be.from == cf && be.to == ct)
            return {static_cast<int>(e), l > 0 ? 1 : -1};
    }
    throw Error("internal: directed edge lookup failed");
}

void require_safe(const BallComplex& b, int u, int v) {
    if (!b.pair_is_safe(u, v))
        throw Error("geodesic endpoints are outside the safe region for radius " +
                    std::to_string(b.radius));
}

} // namespace

GeodesicPath geodesic(const BallComplex& b, int u, int v) {
    require_safe(b, u, v);
    const auto& du = b.distances_from(u);
    const auto& dv = b.distances_from(v);
    GeodesicPath p;
    p.vertices.push_back(u);
    int cur = u;
    while (cur != v) {
        // Deterministic: smallest (letter, target) that makes progress.
        std::vector<std::pair<Letter, int>> nbr = b.neighbors(cur);
        std::sort(nbr.begin(), nbr.end());
        bool stepped = false;
        for (const auto& [l, to] : nbr) {
            if (du[static_cast<std::size_t>(to)] == du[static_cast<std::size_t>(cur)] + 1 &&
                dv[static_cast<std::size_t>(to)] == dv[static_cast<std::size_t>(cur)] - 1) {
                p.steps.push_back(directed_edge_between(b, cur, to, l));
                p.vertices.push_back(to);
                cur = to;
                stepped = true;
                break;
            }
        }
        if (!stepped) throw Error("internal: geodesic reconstruction failed");
    }
    return p;
}

std::vector<GeodesicPath> all_geodesics(const BallComplex& b, int u, int v, std::size_t cap) {
    require_safe(b, u, v);
    const auto& du = b.distances_from(u);
    const auto& dv = b.distances_from(v);
    std::vector<GeodesicPath> out;
    GeodesicPath cur;
    cur.vertices.push_back(u);
    std::function<void(int)> dfs = [&](int at) {
        if (at == v) {
            out.push_back(cur);
            if (out.size() > cap) throw Error("all_geodesics: path count exceeds cap");
            return;
        }
        std::vector<std::pair<Letter, int>> nbr = b.neighbors(at);
        std::sort(nbr.begin(), nbr.end());
        for (const auto& [l, to] : nbr) {
            if (du[static_cast<std::size_t>(to)] != du[static_cast<std::size_t>(at)] + 1 ||
                dv[static_cast<std::size_t>(to)] != dv[static_cast<std::size_t>(at)] - 1)
                continue;
            cur.steps.push_back(directed_edge_between(b, at, to, l));
            cur.vertices.push_back(to);
            dfs(to);
            cur.steps.pop_back();
            cur.vertices.pop_back();
        }
    };
    dfs(u);
    return out;
}

long long path_relative_length(const BallComplex& b, const GeodesicPath& p, const PseudometricChoice& pm) {
    const GraphOfSpaces& g = b.complex.graph;
    long long total = 0;
    std::size_t i = 0;
    while (i < p.steps.size()) {
        const BallEdge& e = b.edges[static_cast<std::size_t>(p.steps[i].edge)];
        if (g.is_essential(e.letter)) {
            total += 1;
            ++i;
            continue;
        }
        int factor = g.symbol(e.letter).factor;
        std::size_t j = i;
        while (j < p.steps.size()) {
            const BallEdge& ej = b.edges[static_cast<std::size_t>(p.steps[j].edge)];
            if (g.is_essential(ej.letter) || g.symbol(ej.letter).factor != factor) break;
            ++j;
        }
        total += pm.syllable_value(factor, static_cast<long long>(j - i));
        i = j;
    }
    return total;
}

GeodesicPath relative_geodesic(const BallComplex& b, int u, int v, const PseudometricChoice& pm) {
    require_safe(b, u, v);
    const GraphOfSpaces& g = b.complex.graph;
    const std::size_t n = b.vertices.size();

    // Component membership lists for syllable jumps.
    std::map<int, std::vector<int>> comp_vertices;
    for (std::size_t i = 0; i < n; ++i) comp_vertices[b.vertices[i].component].push_back(static_cast<int>(i));

    // Distances within one component (generator edges only).
    auto component_distances = [&](int src) {
        std::vector<int> dist(n, -1);
        std::deque<int> q{src};
        dist[static_cast<std::size_t>(src)] = 0;
        while (!q.empty()) {
            int cur = q.front();
            q.pop_front();
            for (const auto& [l, to] : b.neighbors(cur)) {
                if (g.is_essential(l)) continue;
                if (dist[static_cast<std::size_t>(to)] < 0) {
                    dist[static_cast<std::size_t>(to)] = dist[static_cast<std::size_t>(cur)] + 1;
                    q.push_back(to);
                }
            }
        }
        return dist;
    };

    constexpr long long INF = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> cost(n, INF);
    struct Prev {
        int vertex = -1;
        bool jump = false;
    };
    std::vector<Prev> prev(n);
    using QE = std::pair<long long, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    cost[static_cast<std::size_t>(u)] = 0;
    pq.push({0, u});
    std::map<int, std::vector<int>> comp_dist_cache;
    while (!pq.empty()) {
        auto [c, at] = pq.top();
        pq.pop();
        if (c != cost[static_cast<std::size_t>(at)]) continue;
        if (at == v) break;
        for (const auto& [l, to] : b.neighbors(at)) {
            if (!g.is_essential(l)) continue;
            if (c + 1 < cost[static_cast<std::size_t>(to)]) {
                cost[static_cast<std::size_t>(to)] = c + 1;
                prev[static_cast<std::size_t>(to)] = {at, false};
                pq.push({c + 1, to});
            }
        }
        auto dit = comp_dist_cache.find(at);
        if (dit == comp_dist_cache.end()) dit = comp_dist_cache.emplace(at, component_distances(at)).first;
        const auto& cd = dit->second;
        for (int to : comp_vertices[b.vertices[static_cast<std::size_t>(at)].component]) {
            if (to == at || cd[static_cast<std::size_t>(to)] < 0) continue;
            long long w = pm.syllable_value(b.vertices[static_cast<std::size_t>(at)].factor,
                                            cd[static_cast<std::size_t>(to)]);
            if (c + w < cost[static_cast<std::size_t>(to)]) {
                cost[static_cast<std::size_t>(to)] = c + w;
                prev[static_cast<std::size_t>(to)] = {at, true};
                pq.push({c + w, to});
            }
        }
    }
    if (cost[static_cast<std::size_t>(v)] >= INF) throw Error("relative_geodesic: target unreachable");

    // Reconstruct, expanding jumps into vertex-space geodesics.
    std::vector<std::pair<int, bool>> chain;  // (vertex, arrived-by-jump)
    for (int at = v; at != u; at = prev[static_cast<std::size_t>(at)].vertex)
        chain.push_back({at, prev[static_cast<std::size_t>(at)].jump});
    std::reverse(chain.begin(), chain.end());
    GeodesicPath path;
    path.vertices.push_back(u);
    int at = u;
    for (const auto& [to, jump] : chain) {
        if (!jump) {
            for (const auto& [l, nb] : b.neighbors(at)) {
                if (nb == to && g.is_essential(l)) {
                    path.steps.push_back(directed_edge_between(b, at, to, l));
                    break;
                }
            }
            path.vertices.push_back(to);
        } else {
            // BFS path inside the component.
            std::vector<int> par(n, -1);
            std::vector<Letter> parl(n, 0);
            std::deque<int> q{at};
            par[static_cast<std::size_t>(at)] = at;
            while (!q.empty() && par[static_cast<std::size_t>(to)] < 0) {
                int cur = q.front();
                q.pop_front();
                std::vector<std::pair<Letter, int>> nbr = b.neighbors(cur);
                std::sort(nbr.begin(), nbr.end());
                for (const auto& [l, nb] : nbr) {
                    if (g.is_essential(l) || par[static_cast<std::size_t>(nb)] >= 0) continue;
                    par[static_cast<std::size_t>(nb)] = cur;
                    parl[static_cast<std::size_t>(nb)] = l;
                    q.push_back(nb);
                }
            }
            std::vector<std::pair<int, Letter>> seg;
            for (int c2 = to; c2 != at; c2 = par[static_cast<std::size_t>(c2)])
                seg.push_back({c2, parl[static_cast<std::size_t>(c2)]});
            std::reverse(seg.begin(), seg.end());
            int cur = at;
            for (const auto& [nb, l] : seg) {
                path.steps.push_back(directed_edge_between(b, cur, nb, l));
                path.vertices.push_back(nb);
                cur = nb;
            }
        }
        at = to;
    }
    return path;
}

// ---------------------------------------------------------------------------
// Checks

CheckReport check_degree_bound(const BallComplex& b) {
    CheckReport rep;
    const GraphOfSpaces& g = b.complex.graph;
    for (std::size_t v = 0; v < b.vertices.size(); ++v) {
        if (b.vertices[v].depth >= b.radius) continue;  // frontier vertices are incomplete
        std::size_t expected = letters_at(g, b.vertices[v].factor).size();
        std::size_t got = b.adjacency_[v].size();
        ++rep.cases_checked;
        if (got != expected)
            rep.fail("vertex " + std::to_string(v) + " has degree " + std::to_string(got) +
                     ", expected " + std::to_string(expected));
    }
    return rep;
}

namespace {

// Shared enumeration: calls fn(u, v) on safe pairs with 1 <= d(u,v) <= max_distance.
template <typename F>
void for_safe_pairs(const BallComplex& b, int max_distance, F&& fn) {
    for (std::size_t u = 0; u < b.vertices.size(); ++u) {
        const auto& du = b.distances_from(static_cast<int>(u));
        for (std::size_t v = u + 1; v < b.vertices.size(); ++v) {
            int d = du[v];
            if (d < 1 || d > max_distance) continue;
            if (!b.pair_is_safe(static_cast<int>(u), static_cast<int>(v))) continue;
            fn(static_cast<int>(u), static_cast<int>(v));
        }
    }
}

// Edge sets of a path, as edge ids.
std::set<int> edge_set(const GeodesicPath& p) {
    std::set<int> out;
    for (const DirectedEdge& de : p.steps) out.insert(de.edge);
    return out;
}

void audit_path_against_cells(const BallComplex& b, const GeodesicPath& path, const char* what,
                              CheckReport& rep) {
    const GraphOfSpaces& g = b.complex.graph;
    std::set<int> pedges = edge_set(path);
    // Candidate cells: those meeting the path.
    std::set<int> cands;
    for (int e : pedges)
        for (const auto& [c, o] : b.edge_cells_[static_cast<std::size_t>(e)]) {
            (void)o;
            cands.insert(c);
        }
    for (int ci : cands) {
        const EssentialCellInstance& cell = b.cells[static_cast<std::size_t>(ci)];
        int L = static_cast<int>(cell.boundary.size());
        // Full position class absorbed by the path?
        for (int start = 0; start < cell.period_length; ++start) {
            bool all = true;
            for (int j = 0; j < cell.exponent && all; ++j) {
                int occ = (start + j * cell.period_length) % L;
                all = pedges.count(cell.boundary[static_cast<std::size_t>(occ)].edge) > 0;
            }
            if (all)
                rep.fail(std::string(what) + " between " + std::to_string(path.vertices.front()) + " and " +
                         std::to_string(path.vertices.back()) + " contains the full position class " +
                         std::to_string(start) + " of cell " + std::to_string(ci));
        }
        // More than half of the cell's essential edges?
        int shared = 0;
        std::set<int> seen;
        for (const CellOccurrence& oc : cell.boundary) {
            if (!g.is_essential(b.edges[static_cast<std::size_t>(oc.edge)].letter)) continue;
            if (pedges.count(oc.edge) && seen.insert(oc.edge).second) ++shared;
        }
        if (2 * shared > cell.essential_edge_count)
            rep.fail(std::string(what) + " between " + std::to_string(path.vertices.front()) + " and " +
                     std::to_string(path.vertices.back()) + " shares " + std::to_string(shared) + " of " +
                     std::to_string(cell.essential_edge_count) + " essential edges of cell " +
                     std::to_string(ci));
    }
    ++rep.cases_checked;
}

} // namespace

CheckReport check_geodesic_cell_interaction(const BallComplex& b, int max_distance,
                                            std::size_t geodesic_cap) {
    CheckReport rep;
    for_safe_pairs(b, max_distance, [&](int u, int v) {
        for (const GeodesicPath& p : all_geodesics(b, u, v, geodesic_cap))
            audit_path_against_cells(b, p, "geodesic", rep);
    });
    return rep;
}

CheckReport check_relative_geodesic_cell_interaction(const BallComplex& b, int max_distance,
                                                     const std::vector<PseudometricChoice>& choices) {
    CheckReport rep;
    for_safe_pairs(b, max_distance, [&](int u, int v) {
        for (const PseudometricChoice& pm : choices) {
            GeodesicPath p = relative_geodesic(b, u, v, pm);
            audit_path_against_cells(b, p, "relative geodesic", rep);
        }
    });
    return rep;
}

CheckReport check_vertex_space_convexity(const BallComplex& b, int max_distance) {
    CheckReport rep;
    for_safe_pairs(b, max_distance, [&](int u, int v) {
        if (b.vertices[static_cast<std::size_t>(u)].component !=
            b.vertices[static_cast<std::size_t>(v)].component)
            return;
        ++rep.cases_checked;
        const auto& du = b.distances_from(u);
        const auto& dv = b.distances_from(v);
        int d = du[static_cast<std::size_t>(v)];
        for (std::size_t z = 0; z < b.vertices.size(); ++z) {
            if (du[z] < 0 || dv[z] < 0 || du[z] + dv[z] != d) continue;
            if (b.vertices[z].component != b.vertices[static_cast<std::size_t>(u)].component)
                rep.fail("geodesic from " + std::to_string(u) + " to " + std::to_string(v) +
                         " can leave the vertex space through vertex " + std::to_string(z));
        }
    });
    return rep;
}

CheckReport check_cell_pair_position_classes(const BallComplex& b) {
    CheckReport rep;
    for (std::size_t i = 0; i < b.cells.size(); ++i) {
        const EssentialCellInstance& ca = b.cells[i];
        for (std::size_t j = 0; j < b.cells.size(); ++j) {
            if (i == j) continue;
            std::set<int> other;
            for (const CellOccurrence& oc : b.cells[j].boundary) other.insert(oc.edge);
            int L = static_cast<int>(ca.boundary.size());
            for (int start = 0; start < ca.period_length; ++start) {
                int hits = 0;
                for (int k = 0; k < ca.exponent; ++k) {
                    int occ = (start + k * ca.period_length) % L;
                    if (other.count(ca.boundary[static_cast<std::size_t>(occ)].edge)) ++hits;
                }
                ++rep.cases_checked;
                if (hits > 1)
                    rep.fail("cells " + std::to_string(i) + " and " + std::to_string(j) + " share " +
                             std::to_string(hits) + " members of position class " + std::to_string(start));
            }
        }
    }
    return rep;
}

CheckReport check_translation_equivariance(const BallComplex& b) {
    CheckReport rep;
    const StaggeredComplex& x = b.complex;
    const GraphOfSpaces& g = x.graph;
    const FactorSpec& f0 = g.factors[0];
    if (f0.rank == 0) return rep;
    Letter h = static_cast<Letter>(g.symbol_of_generator(0, 0));

    // Identify image vertices by label; fall back to the rewriting system.
    std::unordered_map<std::string, int> by_label;
    for (std::size_t v = 0; v < b.vertices.size(); ++v) by_label.emplace(b.vertices[v].label, static_cast<int>(v));
    AbelianizationLattice ab(x);
    auto locate = [&](const Word& w) -> int {
        Word nf = path_normal_form(x, w);
        if (nf.empty()) return 0;
        auto it = by_label.find(nf.key());
        if (it != by_label.end()) return it->second;
        for (std::size_t v = 0; v < b.vertices.size(); ++v) {
            if (b.vertices[v].factor != *end_factor(g, nf)) continue;
            Word diff = nf * b.vertices[v].word.inverse();
            if (!is_closed(g, diff)) continue;
            if (quick_triviality(x, ab, diff) == QuickTriviality::Nontrivial) continue;
            if (is_trivial(x, diff)) return static_cast<int>(v);
        }
        return -1;
    };

    for (std::size_t v = 0; v < b.vertices.size(); ++v) {
        if (b.vertices[v].depth > b.radius - 1) continue;
        Word shifted;
        shifted.letters.push_back(h);
        shifted.letters.insert(shifted.letters.end(), b.vertices[v].word.letters.begin(),
                               b.vertices[v].word.letters.end());
        ++rep.cases_checked;
        if (locate(shifted) < 0)
            rep.fail("translate of vertex " + std::to_string(v) + " missing from the ball");
    }
    return rep;
}

} // namespace cubulate

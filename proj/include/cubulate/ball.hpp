#ifndef CUBULATE_BALL_HPP
#define CUBULATE_BALL_HPP

#include "cubulate/presentation.hpp"
#include "cubulate/word_problem.hpp"

#include <array>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cubulate {

// ---------------------------------------------------------------------------
// A finite radius-R portion of the coned universal cover: vertices carry
// path words from the base vertex, 2-cells are instantiated whenever their
// whole boundary lies inside.

struct BallVertex {
    Word word;          // some path from the base realizing this element
    std::string label;  // rewritten normal form used for hashing
    int factor = 0;     // vertex space the vertex lies in
    int depth = 0;      // graph distance from the base vertex
    int component = 0;  // vertex-space component id
};

struct BallEdge {
    int from = 0;  // canonical direction: from --letter--> to with letter > 0
    int to = 0;
    Letter letter = 0;
    int squares_seen = 0;
    int cells_seen = 0;
    bool complete = false;  // every 2-cell of the cover through this edge is materialized
};

struct DirectedEdge {
    int edge = -1;
    int sign = 1;  // +1 traverses the canonical direction
};

struct BallSquare {
    std::array<DirectedEdge, 4> boundary;  // e1 f1 e2^-1 f2^-1 around the square
    std::array<int, 4> corners;
    int factor = 0;
};

struct CellOccurrence {
    int edge = -1;
    int sign = 1;
    int from_vertex = 0;
    int to_vertex = 0;
};

struct EssentialCellInstance {
    int relator = 0;
    int exponent = 1;
    int period_length = 0;               // letters per period
    int base_vertex = 0;                 // start of occurrence 0
    std::vector<CellOccurrence> boundary;
    int essential_edge_count = 0;        // essential letters on the boundary
};

struct BallOptions {
    // Checked identification escalates residual equality questions through
    // the splice search instead of trusting the greedy loop's "no".
    bool checked_identification = false;
    int oracle_radius = 32;
    long long max_vertices = 2000000;
};

class BallComplex {
public:
    StaggeredComplex complex;
    int radius = 0;
    int wx = 0;  // max attaching-word length over relators

    std::vector<BallVertex> vertices;
    std::vector<BallEdge> edges;
    std::vector<BallSquare> squares;
    std::vector<EssentialCellInstance> cells;

    int base() const { return 0; }
    std::optional<int> neighbor(int v, Letter l) const;
    int edge_between(int u, int v) const;  // -1 if absent
    const std::vector<std::pair<Letter, int>>& neighbors(int v) const {
        return adjacency_[static_cast<std::size_t>(v)];
    }
    std::vector<std::pair<int, int>> cells_through_edge(int edge) const;   // (cell, occurrence)
    const std::vector<int>& squares_through_edge(int edge) const;

    // Distances from a source, computed on demand and cached.
    const std::vector<int>& distances_from(int v) const;
    int distance(int u, int v) const { return distances_from(u)[static_cast<std::size_t>(v)]; }

    // True-distance certificate: every geodesic between the pair lies in the ball.
    bool pair_is_safe(int u, int v) const;

    // internal, exposed for the builder
    std::vector<std::vector<std::pair<Letter, int>>> adjacency_;
    std::vector<std::vector<std::pair<int, int>>> edge_cells_;
    std::vector<std::vector<int>> edge_squares_;
    mutable std::unordered_map<int, std::vector<int>> dist_cache_;
};

BallComplex build_ball(const StaggeredComplex& x, int radius, const BallOptions& opts = {});

// Occurrence indices sharing the position of occ in the cell: {occ + j|p| mod L}.
std::vector<int> position_class(const EssentialCellInstance& c, int occ);

// ---------------------------------------------------------------------------
// Geodesics

struct GeodesicPath {
    std::vector<int> vertices;         // length k+1
    std::vector<DirectedEdge> steps;   // length k
};

// One shortest path in the 1-skeleton; requires pair_is_safe.
GeodesicPath geodesic(const BallComplex& b, int u, int v);

// Every shortest path between the pair (requires pair_is_safe); throws when
// more than `cap` paths exist.
std::vector<GeodesicPath> all_geodesics(const BallComplex& b, int u, int v, std::size_t cap = 200000);

// Minimizes relative length for the pseudometric choice; factor syllables
// are expanded to vertex-space geodesics.
GeodesicPath relative_geodesic(const BallComplex& b, int u, int v, const PseudometricChoice& pm);

long long path_relative_length(const BallComplex& b, const GeodesicPath& p, const PseudometricChoice& pm);

// ---------------------------------------------------------------------------
// Property checks over the ball

struct CheckReport {
    bool ok = true;
    long long cases_checked = 0;
    std::vector<std::string> violations;
    void fail(const std::string& v) {
        ok = false;
        if (violations.size() < 50) violations.push_back(v);
    }
};

// Local finiteness: degree of every interior vertex matches the cover.
CheckReport check_degree_bound(const BallComplex& b);

// Geodesics between safe pairs at distance <= max_distance never contain a
// full position class of a materialized cell, and never carry more than
// half of any cell's essential edges.
CheckReport check_geodesic_cell_interaction(const BallComplex& b, int max_distance,
                                            std::size_t geodesic_cap = 200000);

// Same statement for one relative geodesic per safe pair and pseudometric mode.
CheckReport check_relative_geodesic_cell_interaction(const BallComplex& b, int max_distance,
                                                     const std::vector<PseudometricChoice>& choices);

// Every geodesic between same-component vertices stays in the component.
CheckReport check_vertex_space_convexity(const BallComplex& b, int max_distance);

// Distinct cells share at most one member of any position class.
CheckReport check_cell_pair_position_classes(const BallComplex& b);

// Left translation by a base-factor generator maps the sub-ball into the ball.
CheckReport check_translation_equivariance(const BallComplex& b);

} // namespace cubulate

#endif

#ifndef CUBULATE_WORD_PROBLEM_HPP
#define CUBULATE_WORD_PROBLEM_HPP

#include "cubulate/presentation.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cubulate {

// ---------------------------------------------------------------------------
// Pseudometrics on vertex spaces

enum class VertexMetricMode {
    Intrinsic,  // graph metric of the vertex space
    Zero,       // electrified
    Coned,      // distance 1 between distinct points
    Horoball,   // distance through a combinatorial horoball of given depth
};

struct PseudometricChoice {
    std::vector<VertexMetricMode> mode_per_factor;
    int horoball_depth = -1;  // required when any factor uses Horoball mode

    static PseudometricChoice uniform(const StaggeredComplex& x, VertexMetricMode m, int depth = -1);
    VertexMetricMode mode(int factor) const { return mode_per_factor[static_cast<std::size_t>(factor)]; }
    // Pseudometric value for two points of one vertex space at intrinsic
    // distance d. All built-in modes depend only on d.
    long long syllable_value(int factor, long long d) const;
};

// Horoball distance between level-0 points at base distance d, depth L.
// Matches shortest paths in the explicit horoball graph (see horoball module).
long long horoball_level0_distance(long long d, int depth);

// ---------------------------------------------------------------------------
// Dehn traces

struct DehnEvent {
    int relator = 0;
    int direction = 1;           // +1 relator, -1 inverse
    int rotation = 0;            // essential-letter offset into the attaching cycle
    int matched_essential = 0;   // essential letters of the cycle found in the word
    int replaced_essential = 0;  // essential letters written back
    Word before;                 // cyclic normal form prior to the rewrite
    Word after;                  // cyclic normal form after the rewrite
};

struct DehnTrace {
    Word input;
    Word output;  // empty iff the word reduced to the identity
    std::vector<DehnEvent> events;
};

// ---------------------------------------------------------------------------
// Operations

// Path normal form: free/abelian syllable reduction plus edge backtracking
// removal. Same function the presentation module exposes; re-exported here
// because every word-problem routine starts with it.
inline Word normalized(const StaggeredComplex& x, const Word& w) { return normalize(x, w); }

// Number of essential-edge letters of a normalized word.
int bs_length(const StaggeredComplex& x, const Word& w);

// k essential letters plus the chosen pseudometric length of each maximal
// factor syllable.
long long relative_length(const StaggeredComplex& x, const Word& w, const PseudometricChoice& pm);

// One Dehn rewrite: a cyclic subword matching more than half of the
// essential letters of some relator cycle (syllables compared as factor
// elements) is replaced by the complementary arc. Returns the rewritten
// word and the event, or nullopt when no admissible match exists.
std::optional<std::pair<Word, DehnEvent>> dehn_step(const StaggeredComplex& x, const Word& w,
                                                    bool cyclic = true);

enum class TrivialityMode { Dehn, Oracle, CrossCheck };

struct TrivialityOptions {
    TrivialityMode mode = TrivialityMode::Dehn;
    int oracle_radius = 0;  // max letters of intermediate cyclic normal forms
    DehnTrace* trace_out = nullptr;
};

class InconclusiveError : public Error {
public:
    explicit InconclusiveError(const std::string& m) : Error(m) {}
};

class CrossCheckError : public Error {
public:
    explicit CrossCheckError(const std::string& m) : Error(m) {}
};

bool is_trivial(const StaggeredComplex& x, const Word& w, const TrivialityOptions& opts = {});

bool are_equal(const StaggeredComplex& x, const Word& u, const Word& v,
               const TrivialityOptions& opts = {});

// Fixed point of normalize + linear dehn_step on an open path. Not a
// canonical form in general; used as a cheap vertex label by the ball
// builder, with genuine equality checked through are_equal.
Word path_normal_form(const StaggeredComplex& x, const Word& w);

// Relator-rewrite count of the trace that reduced w; throws if w is not
// trivial under the requested mode.
int area_estimate(const StaggeredComplex& x, const Word& w, const TrivialityOptions& opts = {});

// Replays a trace and checks every event: the matched and replacement arcs
// must bound a relator disk and the word sequence must chain correctly.
bool verify_trace(const StaggeredComplex& x, const DehnTrace& t);

// ---------------------------------------------------------------------------
// Cheap sound invariants, used to prune equality testing

enum class QuickTriviality { Trivial, Nontrivial, Unknown };

class AbelianizationLattice {
public:
    explicit AbelianizationLattice(const StaggeredComplex& x);
    // Exponent-sum vector of w modulo the relator lattice; zero iff possibly trivial.
    bool in_lattice(const StaggeredComplex& x, const Word& w) const;

private:
    std::vector<std::vector<long long>> basis_;  // Hermite-reduced relator vectors
    int dim_ = 0;
};

// Decides triviality without running the rewrite loop where a sound
// certificate exists: empty words, single-factor words, words with too few
// essential letters to meet any relator, abelianization obstructions.
QuickTriviality quick_triviality(const StaggeredComplex& x, const AbelianizationLattice& ab, const Word& w);

// ---------------------------------------------------------------------------
// Corpus generation (seeded products of conjugated relators)

struct TrivialWordSpec {
    int count = 500;
    int max_conjugates = 5;
    int max_conjugator_length = 8;
    std::uint64_t seed = 7;
};

std::vector<Word> make_trivial_words(const StaggeredComplex& x, const TrivialWordSpec& spec);

} // namespace cubulate

#endif

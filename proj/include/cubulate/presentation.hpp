#ifndef CUBULATE_PRESENTATION_HPP
#define CUBULATE_PRESENTATION_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cubulate {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& msg)
        : Error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const { return line_; }
    int column() const { return column_; }
private:
    int line_;
    int column_;
};

// ---------------------------------------------------------------------------
// Factors, edges, symbols

enum class FactorKind { Free, FreeAbelian };

struct FactorSpec {
    std::string name;
    FactorKind kind = FactorKind::Free;
    int rank = 0;
    std::vector<std::string> generator_names;
};

enum class SymbolKind { Generator, EssentialEdge };

// Global symbol table entry. Symbols are 1-based so a letter can be
// encoded as +sym / -sym in a single int.
struct Symbol {
    std::string name;
    SymbolKind kind = SymbolKind::Generator;
    int factor = -1;     // generators: owning factor index
    int gen_index = -1;  // generators: index within the factor
    int edge = -1;       // essential edges: index into edges
};

struct EssentialEdge {
    std::string name;
    int from_factor = 0;
    int to_factor = 0;
    int symbol = 0;
    int order_rank = 0;  // position in the total edge order
};

// A letter is +sym (positive direction) or -sym (inverse).
using Letter = std::int32_t;

struct Word {
    std::vector<Letter> letters;

    Word() = default;
    explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

    bool empty() const { return letters.empty(); }
    std::size_t size() const { return letters.size(); }

    Word inverse() const {
        Word w;
        w.letters.reserve(letters.size());
        for (auto it = letters.rbegin(); it != letters.rend(); ++it) w.letters.push_back(-*it);
        return w;
    }
    Word operator*(const Word& rhs) const {
        Word w = *this;
        w.letters.insert(w.letters.end(), rhs.letters.begin(), rhs.letters.end());
        return w;
    }
    bool operator==(const Word& o) const { return letters == o.letters; }
    bool operator!=(const Word& o) const { return !(*this == o); }

    // Compact canonical key, e.g. "3.-1.2"
    std::string key() const;
};

// ---------------------------------------------------------------------------
// Graph of spaces

struct GraphOfSpaces {
    std::vector<FactorSpec> factors;
    std::vector<EssentialEdge> edges;
    std::vector<Symbol> symbols;  // symbols[0] unused; ids are 1-based

    int factor_index(const std::string& name) const;
    int symbol_index(const std::string& name) const;  // 0 if unknown
    const Symbol& symbol(Letter l) const { return symbols[static_cast<std::size_t>(l < 0 ? -l : l)]; }
    int symbol_of_generator(int factor, int gen_index) const;
    int symbol_of_edge(int edge) const { return edges[static_cast<std::size_t>(edge)].symbol; }

    bool is_generator(Letter l) const { return symbol(l).kind == SymbolKind::Generator; }
    bool is_essential(Letter l) const { return symbol(l).kind == SymbolKind::EssentialEdge; }

    // Factor the path occupies before/after traversing the letter.
    int letter_source(Letter l) const;
    int letter_target(Letter l) const;

    // Edge order comparison by order_rank.
    bool edge_less(int e1, int e2) const {
        return edges[static_cast<std::size_t>(e1)].order_rank < edges[static_cast<std::size_t>(e2)].order_rank;
    }

    bool connected() const;
    // The headline shape: exactly two factors joined by a single essential edge.
    bool is_single_edge_dumbbell() const;

    std::string letter_name(Letter l) const;
};

// ---------------------------------------------------------------------------
// Relators and the full presentation

struct Relator {
    Word period;       // p: closed, cyclically reduced, starts with an essential letter
    int exponent = 1;  // m: attaching word is p^m
    Word attaching;    // p^m, stored explicitly
    int min_edge = -1; // least essential edge used by p (edge index)
    int max_edge = -1; // greatest essential edge used by p
};

struct StaggeringViolation {
    int relator_a = 0;
    int relator_b = 0;
    std::string what;
};

struct StaggeredComplex {
    GraphOfSpaces graph;
    std::vector<Relator> relators;  // in staggering order

    bool has_relators() const { return !relators.empty(); }
    // Largest attaching-word length over relators (0 if none).
    int max_attaching_length() const;
};

// ---------------------------------------------------------------------------
// Path bookkeeping

// Factor at which the word starts / ends; nullopt for the empty word.
std::optional<int> start_factor(const GraphOfSpaces& g, const Word& w);
std::optional<int> end_factor(const GraphOfSpaces& g, const Word& w);
bool is_valid_path(const GraphOfSpaces& g, const Word& w);
bool is_closed(const GraphOfSpaces& g, const Word& w);
void require_valid_path(const GraphOfSpaces& g, const Word& w);

// ---------------------------------------------------------------------------
// Normal forms

// Freely/abelianly reduce syllables (free: stack reduction; free-abelian:
// exponent vector realized as a monotone staircase), merge adjacent
// same-factor syllables, and remove edge backtracking e g e^-1 with g
// trivial. Canonical for path homotopy in the graph of spaces.
Word normalize(const StaggeredComplex& x, const Word& w);

// Cyclic normal form of a closed word: normalize plus reduction across the
// seam, returned in the lexicographically least rotation.
Word cyclic_reduce(const StaggeredComplex& x, const Word& w);

// Exponent decomposition of a closed word using at least one essential
// edge: the largest m with w = p^m as cyclic words.
std::pair<Word, int> compute_exponent(const StaggeredComplex& x, const Word& w);

// ---------------------------------------------------------------------------
// Parsing, validation, serialization

// Parse the line-oriented presentation DSL. Validates connectivity,
// staggering and relator shape; relator words are cyclically reduced and
// geodesified per factor.
StaggeredComplex parse_presentation(const std::string& text);

// Parse a word expression like "(a b)^4 t^-1" against an existing complex.
// Inserts edge letters automatically on a single-edge dumbbell.
Word parse_word(const StaggeredComplex& x, const std::string& expr);

std::vector<StaggeringViolation> validate_staggering(const StaggeredComplex& x);

struct MinExponent {
    int value = 0;
    bool below_four = false;  // guarantees of the main theorems need >= 4
};
MinExponent min_exponent(const StaggeredComplex& x);

std::string serialize(const StaggeredComplex& x);
std::string word_to_string(const GraphOfSpaces& g, const Word& w);

} // namespace cubulate

#endif

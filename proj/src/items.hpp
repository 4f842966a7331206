#ifndef CUBULATE_SRC_ITEMS_HPP
#define CUBULATE_SRC_ITEMS_HPP

// Internal word representation shared by the presentation, word-problem and
// diagram translation units: a word as alternating factor syllables and
// essential letters.

#include "cubulate/presentation.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

namespace cubulate::detail {

struct Item {
    bool essential = false;
    Letter letter = 0;         // essential items
    int factor = -1;           // syllable items
    std::vector<Letter> body;  // syllable items: letters
    bool syllable_empty() const { return !essential && body.empty(); }
};

inline std::vector<Letter> reduce_free(const std::vector<Letter>& ls) {
    std::vector<Letter> out;
    out.reserve(ls.size());
    for (Letter l : ls) {
        if (!out.empty() && out.back() == -l) out.pop_back();
        else out.push_back(l);
    }
    return out;
}

inline std::vector<Letter> reduce_abelian(const GraphOfSpaces& g, int factor, const std::vector<Letter>& ls) {
    const FactorSpec& f = g.factors[static_cast<std::size_t>(factor)];
    std::vector<long long> exp(static_cast<std::size_t>(f.rank), 0);
    for (Letter l : ls) {
        const Symbol& s = g.symbol(l);
        exp[static_cast<std::size_t>(s.gen_index)] += (l > 0 ? 1 : -1);
    }
    std::vector<Letter> out;
    for (int i = 0; i < f.rank; ++i) {
        int sym = g.symbol_of_generator(factor, i);
        long long e = exp[static_cast<std::size_t>(i)];
        for (long long k = 0; k < std::llabs(e); ++k) out.push_back(e > 0 ? sym : -sym);
    }
    return out;
}

inline std::vector<Item> to_items(const GraphOfSpaces& g, const Word& w) {
    std::vector<Item> items;
    for (Letter l : w.letters) {
        const Symbol& s = g.symbol(l);
        if (s.kind == SymbolKind::EssentialEdge) {
            Item it;
            it.essential = true;
            it.letter = l;
            items.push_back(std::move(it));
        } else {
            if (items.empty() || items.back().essential || items.back().factor != s.factor) {
                Item it;
                it.factor = s.factor;
                items.push_back(std::move(it));
            }
            items.back().body.push_back(l);
        }
    }
    return items;
}

inline Word from_items(const std::vector<Item>& items) {
    Word w;
    for (const Item& it : items) {
        if (it.essential) w.letters.push_back(it.letter);
        else w.letters.insert(w.letters.end(), it.body.begin(), it.body.end());
    }
    return w;
}

inline void normalize_syllables(const GraphOfSpaces& g, std::vector<Item>& items) {
    for (Item& it : items) {
        if (it.essential) continue;
        const FactorSpec& f = g.factors[static_cast<std::size_t>(it.factor)];
        it.body = f.kind == FactorKind::Free ? reduce_free(it.body) : reduce_abelian(g, it.factor, it.body);
    }
}

// One reduction pass: drop empty syllables, merge same-factor neighbors,
// cancel adjacent inverse essential letters.
inline bool reduce_items_once(const GraphOfSpaces& g, std::vector<Item>& items) {
    bool changed = false;
    std::vector<Item> out;
    out.reserve(items.size());
    for (Item& it : items) {
        if (!it.essential && it.syllable_empty()) { changed = true; continue; }
        if (!out.empty()) {
            if (!out.back().essential && !it.essential && out.back().factor == it.factor) {
                out.back().body.insert(out.back().body.end(), it.body.begin(), it.body.end());
                changed = true;
                continue;
            }
            if (out.back().essential && it.essential && out.back().letter == -it.letter) {
                out.pop_back();
                changed = true;
                continue;
            }
        }
        out.push_back(std::move(it));
    }
    items = std::move(out);
    if (changed) normalize_syllables(g, items);
    return changed;
}

inline std::vector<Item> normalize_items(const GraphOfSpaces& g, const Word& w) {
    std::vector<Item> items = to_items(g, w);
    normalize_syllables(g, items);
    while (reduce_items_once(g, items)) {}
    return items;
}

// Least letter sequence among item-boundary rotations of a cyclic word.
inline Word least_rotation(const std::vector<Item>& items) {
    if (items.empty()) return Word{};
    Word best;
    for (std::size_t r = 0; r < items.size(); ++r) {
        std::vector<Item> rot(items.begin() + static_cast<std::ptrdiff_t>(r), items.end());
        rot.insert(rot.end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(r));
        Word cand = from_items(rot);
        if (best.empty() || cand.letters < best.letters) best = cand;
    }
    return best;
}

// Cyclic word with at least one essential letter, viewed as essential
// letters with the (possibly empty) syllable after each one.
struct EssGapView {
    std::vector<Letter> ess;
    std::vector<std::vector<Letter>> gap;  // gap[i] follows ess[i]
    std::vector<int> gap_factor;           // -1 when the gap is empty

    std::size_t size() const { return ess.size(); }
};

// Builds the cyclic view; requires a normalized closed word using at least
// one essential letter.
inline EssGapView cyclic_view(const GraphOfSpaces& g, const std::vector<Item>& items_in) {
    std::vector<Item> items = items_in;
    std::size_t first = items.size();
    for (std::size_t i = 0; i < items.size(); ++i)
        if (items[i].essential) { first = i; break; }
    if (first == items.size()) throw Error("cyclic_view: no essential letter");
    std::rotate(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(first), items.end());
    EssGapView v;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].essential) {
            v.ess.push_back(items[i].letter);
            v.gap.emplace_back();
            v.gap_factor.push_back(-1);
        } else {
            v.gap.back() = items[i].body;
            v.gap_factor.back() = items[i].factor;
        }
    }
    return v;
}

} // namespace cubulate::detail

#endif

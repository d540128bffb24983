// Interaction diagrams for the expansion moments. A single interaction tree
// of order n is encoded by a merge history: starting from 2n+1 initial waves,
// vertex v_i merges three adjacent waves at position l_i, so slice i holds
// 1+2(n-i) waves. Conjugation is tracked by a parity on every wave, fixed by
// a top-down recursion: below each vertex the (left, middle, right) children
// carry parities (-1, parity of the output, +1). Second moments pair a
// (+1)-top tree against a (-1)-top tree: the 4n+2 initial waves are matched
// into pairs of opposite parity, and the frequency bookkeeping becomes a
// linear (Kirchhoff) constraint system plus the multiplicative truncation
// factors 1 - delta - delta inherited from the truncated product.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lab/grid.hpp"
#include "lab/params.hpp"

namespace lab {

struct InteractionDiagram {
    int n = 0;
    std::vector<int> history; // l_i in 1..2(n-i)+1
    int top_parity = +1;
    // Wave ids: 0..2n are the initial waves (slice-0 positions 1..2n+1, left
    // to right); 2n+i is the output of vertex v_i. 3n+1 waves in total.
    std::vector<std::vector<int>> slot; // slot[i][j-1]: wave at slice i, position j
    std::vector<int> parity;            // per wave id, +1 or -1
    struct Vertex {
        std::array<int, 3> child{}; // (left, middle, right) wave ids
        int out = 0;
    };
    std::vector<Vertex> vertex;           // vertex[i-1] = v_i, time-ordered
    std::vector<std::vector<int>> in_set; // initial waves below v_i, sorted

    int initial_count() const { return 2 * n + 1; }
    int wave_count() const { return 3 * n + 1; }
    int top_wave() const { return slot.back()[0]; }
};

// All (2n-1)!! merge histories in lexicographic order. Orders above the cap
// are refused (factorial growth) with a resource_error.
std::vector<std::vector<int>> enumerate_histories(int n, int cap = 5);

InteractionDiagram build_diagram(int n, const std::vector<int>& history, int top_parity);

// Linear frequency bookkeeping of a paired diagram. Variables are the global
// wave ids: left-tree waves first, then right-tree waves shifted by 3n+1.
struct KirchhoffSystem {
    int nvars = 0;
    // each constraint: integer coefficients c with sum_e c[e] k_e = 0
    std::vector<std::vector<int>> constraints;
    // per global vertex (left v_1..v_n then right v_1..v_n): output wave,
    // children waves, output parity, and the two suppressed diagonals {a,b}
    // whose coincidence k_a + k_b = 0 the truncation factor removes
    std::vector<int> vertex_out;
    std::vector<std::array<int, 3>> vertex_child;
    std::vector<int> vertex_parity;
    std::vector<std::array<std::array<int, 2>, 2>> suppressed;
};

struct PairedDiagram {
    InteractionDiagram left, right;       // top parities +1 and -1
    std::vector<std::array<int, 2>> pairs; // global initial ids, opposite parity
    std::vector<int> partner;              // partner[global initial id]
    KirchhoffSystem system;

    int n() const { return left.n; }
    int right_offset() const { return left.wave_count(); }
};

// All parity-admissible pairings of the 4n+2 initial waves ((2n+1)! of them);
// frequency equality within pairs lives in the constraint system, not here.
std::vector<PairedDiagram> enumerate_pairings(const InteractionDiagram& left,
                                              const InteractionDiagram& right);

// A degeneracy at a vertex: two opposite-parity children whose combined
// initial waves are paired entirely among themselves, forcing the two child
// frequencies to cancel.
struct Degeneracy {
    int vertex;                 // global vertex index
    std::array<int, 2> offsets; // which children below the vertex (0,1,2)
    std::array<int, 2> waves;   // the two global child waves, k_a + k_b = 0
};

// Detect all degeneracies and append their implied constraints to the system.
std::vector<Degeneracy> detect_degeneracies(PairedDiagram& paired);

// Resonance modulus at vertex v_i (1-based) of one tree, from per-wave integer
// frequency vectors: |k_right|^2 - |k_left|^2 + sigma_out (|k_mid|^2 - |k_out|^2).
// Frequencies must be assigned (non-empty) for all four waves.
long long resonance_modulus(const InteractionDiagram& g,
                            const std::vector<std::vector<int>>& freq, int vertex_index);

// Order-n iterate of a single realization, reconstructed by direct summation
// over all interaction trees: nested frequency sums over the initial waves
// (each confined to |k|_inf <= band), truncation factors evaluated exactly,
// and the vertex-time phase integral taken in closed form on the ordered
// simplex. Independent of the quadrature marching path, so the two must agree.
FourierField tree_iterate(const PhysicalParams& params, const FourierField& u0, int n,
                          double t, int band);

} // namespace lab

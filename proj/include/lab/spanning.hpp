// Spanning trees on paired diagrams. The paired diagram is viewed as a graph
// whose vertices are the 2n interaction vertices, the 4n+2 initial-wave
// vertices, and the common root; its edges are the 6n+2 interaction edges
// (waves, oriented upward) and the 2n+1 upper pairing edges. A spanning tree
// is grown greedily: pairing edges first, then the child edges of each
// interaction vertex in the natural time order (right graph before left,
// right/middle/left below each vertex), finally the two top edges. The 2n+1
// interaction edges rejected by loop detection are "free": their frequencies
// form exact coordinates on the Kirchhoff solution space, every other edge
// frequency being an integer +-1 combination of free frequencies supported on
// the fundamental cycle of that free edge. Amplitudes of paired diagrams are
// evaluated by summing over pair-representative frequencies with the initial
// spectrum weights, the vertex phase factors integrated either on the time
// simplex (divided differences) or through the resolvent contour form.
#pragma once

#include <complex>
#include <vector>

#include "lab/diagrams.hpp"
#include "lab/params.hpp"
#include "lab/profile.hpp"

namespace lab {

struct SpanningTree {
    int n = 0;
    // global wave ids of the free interaction edges, in rejection order
    // (the left top edge, never added, comes last)
    std::vector<int> free_edges;
    std::vector<int> integrated_edges; // remaining interaction edges, ascending
    // coeffs[i][e]: coefficient of free frequency i in the frequency of
    // interaction edge e; entries in {-1,0,1}, free edges carry unit rows
    std::vector<std::vector<int>> coeffs;
    // natural time-order rank of each interaction edge: 0..n-1 for edges
    // ending at right-graph vertices, n..2n-1 for left-graph vertices, 2n for
    // the two top edges (edges below the same vertex compare equal)
    std::vector<int> edge_rank;
    std::vector<char> free_mask; // per interaction edge

    bool is_free(int edge) const { return free_mask[edge] != 0; }
};

// Greedy construction described above. Throws std::logic_error on any
// internal loop-detection inconsistency (indicates a bug, never valid input).
SpanningTree build_spanning_tree(const PairedDiagram& paired);

// Degree of an interaction vertex: number of free edges among its three
// children (the right child is never free, so the degree is 0, 1 or 2).
struct DegreeProfile {
    int n0 = 0, n1 = 0, n2 = 0;  // counts of degree-0/1/2 vertices
    std::vector<int> per_vertex; // degree per global vertex
};

DegreeProfile classify_degrees(const PairedDiagram& paired, const SpanningTree& tree);

// Amplitude of a paired diagram at time t: the weighted sum over all
// frequency assignments (coordinates: one representative per pair, confined
// to |k|_inf <= freq_cap; default covers the support of A(eps .)) of
//   prod_pairs A(eps k_pair)^2 * (truncation factors) * T_left * T_right,
// scaled by (-1)^{#minus vertices} lambda^{4n} eps^{d(2n+1)} (2pi)^{-2dn},
// where T is the ordered-time phase integral of the tree's resonance moduli.
// Time-simplex form: T by divided differences (exact closed form).
std::complex<double> eval_amplitude_time(const PairedDiagram& paired, const SpanningTree& tree,
                                         double t, const PhysicalParams& params,
                                         const DataProfile& profile, int freq_cap = -1);

// Resolvent form of the same amplitude: T through the contour integral with
// factors i/(alpha - e_k + i eta), e_k the partial sums of the resonance
// moduli; eta defaults to 1/t. The two evaluations must agree.
std::complex<double> eval_amplitude_resolvent(const PairedDiagram& paired,
                                              const SpanningTree& tree, double t,
                                              const PhysicalParams& params,
                                              const DataProfile& profile, int freq_cap = -1,
                                              double eta = -1.0);

// Brute-force count of near-resonant lattice points: k (degree one; and k'
// for degree two) range over |k| < 1/eps, and the count collects
// |Q - alpha| <= beta for
//   degree 1:  Q = |k|^2 + sigma |k0 - k|^2
//   degree 2:  Q = |k|^2 + sigma' |k'|^2 + sigma |k0 - k - k'|^2,
// with sigma, sigma' in {-1,+1} and (sigma, sigma') != (+1,+1) for degree 2.
// Throws resource_error when the lattice is too large to enumerate.
long long lattice_resonance_count(int d, double eps, const std::vector<int>& k0, double alpha,
                                  double beta, int degree, int sigma = -1, int sigma_prime = +1);

} // namespace lab

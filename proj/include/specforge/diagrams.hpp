#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace specforge::diagrams {

enum class Side { ket, bra };
enum class Dir { up, down };

// One light-matter interaction: Ku/Kd act on the ket (left), Bu/Bd on the
// bra (right). Up raises the acted-on side's excitation, Down lowers it.
struct Interaction {
    Side side = Side::ket;
    Dir dir = Dir::up;
    std::size_t pulse_index = 0;

    bool operator==(const Interaction&) const = default;
};

std::string tag(const Interaction& ix);  // "Ku", "Kd", "Bu", "Bd"

enum class Detection {
    polarization,  // implicit final ket-side de-excitation, detect <mu>
    population     // PL-type: detect a diagonal element, no emission
};

struct Diagram {
    std::vector<Interaction> interactions;  // time-ordered, emission excluded
    Detection detection = Detection::polarization;
    int sign = 1;                     // (-1)^(bra-side interaction count)
    std::size_t final_excitation = 0; // ladder level of the final population

    bool operator==(const Diagram&) const = default;
    bool empty() const { return interactions.empty(); }
};

// Canonical DSL form, unquoted tags: ((Bu,0),(Ku,1),(Bd,2)); "()" if empty.
std::string to_dsl(const Diagram& d);

// Parse the tuple-list DSL. Tags may be bare or quoted with ', ` or ";
// whitespace is free. Pulse indices must be nondecreasing. The running
// ket/bra excitation must stay non-negative; the sequence must end in a
// population (PL type) or one ket excitation above it (polarization type,
// completed by the implicit emission). Throws ParseError/ValidationError
// with the offending position.
Diagram parse(const std::string& dsl);

// Per-pulse (n_minus, n_plus): how many conjugate (-k) and non-conjugate
// (+k) interactions the pulse contributes. Single-interaction pulses only.
struct PhasePair {
    unsigned n_minus = 0;
    unsigned n_plus = 0;
};

// Enumerate all diagrams consistent with the phase spec, arrival times and
// manifold cap. +k maps to Ku on the ket / Bd on the bra, -k to Kd / Bu.
// Net wavevector +1 yields polarization diagrams, net 0 yields PL-type
// diagrams, anything else yields none. pulse_times may carry one trailing
// entry (the detection time), which does not affect enumeration. Pulses
// sharing an arrival time are expanded in every relative order and the
// results deduplicated. max_manifold caps the running per-side excitation;
// the ket may overshoot by one right before the implicit emission, which is
// what admits the excited-state-absorption pathways of the standard
// third-order set. Generated diagrams carry time-slot indices 0..n-1.
std::vector<Diagram> generate(const std::vector<PhasePair>& phase,
                              const std::vector<double>& pulse_times_fs,
                              std::size_t max_manifold = 1);

// 2^(n-1): unique terms of the order-n commutator expansion.
std::uint64_t count_terms(unsigned order);

// Ladder picture, time upward, ket rail left, bra rail right, dashed
// emission arrow for polarization diagrams.
std::string render_ascii(const Diagram& d);

}  // namespace specforge::diagrams

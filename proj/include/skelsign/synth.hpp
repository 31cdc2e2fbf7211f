#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "skelsign/data.hpp"
#include "skelsign/rng.hpp"

namespace skelsign {

// Generator settings. A Mono sample moves exactly one hand along a smooth
// sinusoidal arc; a Bi sample moves both. Everything else idles around a
// fixed pose with per-frame gaussian noise, and each sample gets a constant
// whole-body position offset (actors do not stand on the same spot).
struct SynthConfig {
    std::size_t joints = 79;
    std::size_t min_frames = 40;
    std::size_t max_frames = 100;
    double noise_sigma = 0.01;       // per-coordinate, per-frame
    double motion_amplitude = 1.0;   // arc scale, world units
    double frame_rate_hz = 120.0;
    double mono_fraction = 0.5;      // share of Mono samples in a dataset
    double position_jitter = 0.35;   // per-sample whole-body offset, uniform cube
};

// Fixed partition of the joint indices: rest first, then left hand, then
// right hand. Hand size is roughly a quarter of the rig (20 for 79 joints).
struct JointRoleMap {
    std::vector<std::size_t> rest;
    std::vector<std::size_t> left_hand;
    std::vector<std::size_t> right_hand;

    static JointRoleMap for_joint_count(std::size_t joints);
};

SkeletonSequence generate_sample(GestureLabel label, const SynthConfig& cfg, Rng& rng);

// Mono-labelled hard case: the idle hand is raised to the moving hand's mean
// height but does not move.
SkeletonSequence make_ambiguous_sample(const SynthConfig& cfg, Rng& rng);

struct GeneratedDataset {
    std::vector<SkeletonSequence> sequences;
    std::vector<GestureLabel> labels;
};

GeneratedDataset generate_dataset(std::size_t count, const SynthConfig& cfg,
                                  std::uint64_t seed);

void write_sequence_csv(const SkeletonSequence& seq, std::ostream& os);
// One CSV per sequence plus labels.csv; byte-deterministic for a fixed seed.
void write_dataset(const GeneratedDataset& dataset, const std::filesystem::path& dir);

// Sum over frames of the L2 step of the hand's stacked coordinates; the
// separability statistic used by the sanity baseline.
double hand_displacement(const SkeletonSequence& seq,
                         std::span<const std::size_t> hand_joints);

}  // namespace skelsign

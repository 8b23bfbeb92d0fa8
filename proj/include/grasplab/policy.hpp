#pragma once

#include <cstdint>
#include <vector>

#include "grasplab/learn.hpp"
#include "grasplab/oracle.hpp"
#include "grasplab/render.hpp"
#include "grasplab/rng.hpp"

namespace grasplab {

enum class ProposalSource { Random, Heuristic, LearnedSampled, LearnedDense };

const char* proposal_source_name(ProposalSource s);

struct GraspProposal {
    GraspConfig u;
    double score = 1.0; // Random and Heuristic report 1.0 by convention
    ProposalSource source = ProposalSource::Random;
    int bin = 0;
};

// uniform grasp center over the workspace, uniform angular bin
GraspProposal random_policy(const Workspace& ws, Rng& rng, int n_bins = 18);
GraspProposal random_policy(const Workspace& ws, uint64_t seed, int n_bins = 18);

// Bounding-box baseline: largest connected foreground component, minimum-area
// enclosing rectangle, grasp at its center closing along the shorter edge.
GraspProposal heuristic_policy(const ImageGrid& image, const CameraModel& cam, int n_bins = 18);

struct SampleConfig {
    int n_samples = 1000;
    int crop_px = 64;                 // patch side cropped around each candidate
    bool restrict_to_foreground = true; // sample near foreground (dilated by crop/2)
};

// Sliding-window sampling: score random patch centers with the net and return
// the best (center, bin). Ties break toward lower (y, x, bin).
GraspProposal sampled_policy(const ModelParams& params, const ImageGrid& image,
                             const CameraModel& cam, const SampleConfig& cfg, Rng& rng);

// One fully-convolutional pass and a global argmax over (cell, bin).
GraspProposal dense_policy(const ModelParams& params, const ImageGrid& image,
                           const CameraModel& cam);

// helpers shared with tests and the collect pipeline
std::vector<uint8_t> foreground_mask(const ImageGrid& image, float white_threshold = 0.98f);
std::vector<uint8_t> dilate_mask(const std::vector<uint8_t>& mask, int height, int width,
                                 int radius); // Chebyshev disk
struct ComponentInfo {
    std::vector<Vec2> pixels; // pixel centers (x = col + 0.5, y = row + 0.5)
    size_t size = 0;
};
// largest 4-connected foreground component (scan order breaks size ties)
ComponentInfo largest_component(const std::vector<uint8_t>& mask, int height, int width);

int snap_to_bin(double phi, int n_bins = 18);

} // namespace grasplab

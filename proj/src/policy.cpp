#include "grasplab/policy.hpp"

#include <algorithm>
#include <cmath>

#include "grasplab/error.hpp"

namespace grasplab {

namespace {

constexpr double kSquareTieRatio = 1.03; // near-square rectangles snap to bin 0

double axis_angle(Vec2 axis) {
    double phi = std::atan2(axis.y, axis.x);
    if (phi < 0.0) phi += M_PI;
    if (phi >= M_PI) phi -= M_PI;
    return phi;
}

} // namespace

const char* proposal_source_name(ProposalSource s) {
    switch (s) {
        case ProposalSource::Random: return "random";
        case ProposalSource::Heuristic: return "heuristic";
        case ProposalSource::LearnedSampled: return "learned_sampled";
        case ProposalSource::LearnedDense: return "learned_dense";
    }
    return "?";
}

int snap_to_bin(double phi, int n_bins) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_bins; ++k) {
        const double d = closing_angle_distance(phi, bin_to_angle(k, n_bins));
        if (d < best_d - 1e-12) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

GraspProposal random_policy(const Workspace& ws, Rng& rng, int n_bins) {
    if (!(ws.width() > 0.0 && ws.height() > 0.0))
        raise(ErrorCode::ConfigError, "workspace is empty");
    GraspProposal p;
    p.source = ProposalSource::Random;
    p.u.x = rng.uniform(ws.x_min, ws.x_max);
    p.u.y = rng.uniform(ws.y_min, ws.y_max);
    p.bin = static_cast<int>(rng.uniform_int(n_bins));
    p.u.phi = bin_to_angle(p.bin, n_bins);
    p.score = 1.0;
    return p;
}

GraspProposal random_policy(const Workspace& ws, uint64_t seed, int n_bins) {
    Rng rng(seed);
    return random_policy(ws, rng, n_bins);
}

std::vector<uint8_t> foreground_mask(const ImageGrid& image, float white_threshold) {
    std::vector<uint8_t> mask(static_cast<size_t>(image.height) * image.width, 0);
    for (size_t i = 0; i < mask.size(); ++i) {
        const float* px = &image.values[i * 3];
        mask[i] = (px[0] < white_threshold || px[1] < white_threshold || px[2] < white_threshold) ? 1 : 0;
    }
    return mask;
}

std::vector<uint8_t> dilate_mask(const std::vector<uint8_t>& mask, int height, int width,
                                 int radius) {
    if (radius <= 0) return mask;
    std::vector<uint8_t> tmp(mask.size(), 0), out(mask.size(), 0);
    // horizontal pass
    for (int r = 0; r < height; ++r) {
        const uint8_t* src = &mask[static_cast<size_t>(r) * width];
        uint8_t* dst = &tmp[static_cast<size_t>(r) * width];
        for (int c = 0; c < width; ++c) {
            const int lo = std::max(0, c - radius), hi = std::min(width - 1, c + radius);
            uint8_t v = 0;
            for (int i = lo; i <= hi && !v; ++i) v = src[i];
            dst[c] = v;
        }
    }
    // vertical pass
    for (int c = 0; c < width; ++c) {
        for (int r = 0; r < height; ++r) {
            const int lo = std::max(0, r - radius), hi = std::min(height - 1, r + radius);
            uint8_t v = 0;
            for (int i = lo; i <= hi && !v; ++i) v = tmp[static_cast<size_t>(i) * width + c];
            out[static_cast<size_t>(r) * width + c] = v;
        }
    }
    return out;
}

ComponentInfo largest_component(const std::vector<uint8_t>& mask, int height, int width) {
    std::vector<int> label(mask.size(), -1);
    ComponentInfo best;
    std::vector<size_t> stack;
    int next_label = 0;
    for (size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || label[start] >= 0) continue;
        ComponentInfo comp;
        stack.assign(1, start);
        label[start] = next_label;
        while (!stack.empty()) {
            const size_t idx = stack.back();
            stack.pop_back();
            const int r = static_cast<int>(idx) / width;
            const int c = static_cast<int>(idx) % width;
            comp.pixels.push_back({c + 0.5, r + 0.5});
            const int dr[4] = {-1, 1, 0, 0};
            const int dc[4] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                const int nr = r + dr[k], nc = c + dc[k];
                if (nr < 0 || nr >= height || nc < 0 || nc >= width) continue;
                const size_t nidx = static_cast<size_t>(nr) * width + nc;
                if (!mask[nidx] || label[nidx] >= 0) continue;
                label[nidx] = next_label;
                stack.push_back(nidx);
            }
        }
        comp.size = comp.pixels.size();
        if (comp.size > best.size) best = std::move(comp);
        ++next_label;
    }
    return best;
}

GraspProposal heuristic_policy(const ImageGrid& image, const CameraModel& cam, int n_bins) {
    const std::vector<uint8_t> mask = foreground_mask(image);
    const ComponentInfo comp = largest_component(mask, image.height, image.width);
    if (comp.size == 0) raise(ErrorCode::NoForeground, "no foreground pixels in the image");

    const Polygon hull = convex_hull(comp.pixels);
    const MinAreaRect rect = min_area_rect(hull);

    GraspProposal p;
    p.source = ProposalSource::Heuristic;
    const Vec2 world = pixel_to_world(cam, rect.center);
    p.u.x = world.x;
    p.u.y = world.y;
    if (rect.len_short <= 0.0 || rect.len_long <= kSquareTieRatio * rect.len_short) {
        // degenerate or near-square box (circles land here): documented tie-break
        p.bin = 0;
    } else {
        p.bin = snap_to_bin(axis_angle(rect.axis_short), n_bins);
    }
    p.u.phi = bin_to_angle(p.bin, n_bins);
    p.score = 1.0;
    return p;
}

namespace {

struct ArgMax {
    double score = -1.0;
    double y = 0.0, x = 0.0;
    int bin = 0;
    bool set = false;

    // ties break toward lower (y, x, bin)
    void offer(double s, double py, double px, int b) {
        if (!set || s > score) {
            score = s;
            y = py;
            x = px;
            bin = b;
            set = true;
            return;
        }
        if (s == score && (py < y || (py == y && (px < x || (px == x && b < bin))))) {
            y = py;
            x = px;
            bin = b;
        }
    }
};

} // namespace

GraspProposal sampled_policy(const ModelParams& params, const ImageGrid& image,
                             const CameraModel& cam, const SampleConfig& cfg, Rng& rng) {
    if (cfg.n_samples < 1) raise(ErrorCode::ConfigError, "n_samples must be >= 1");
    std::vector<size_t> candidates;
    if (cfg.restrict_to_foreground) {
        std::vector<uint8_t> mask = foreground_mask(image);
        mask = dilate_mask(mask, image.height, image.width, cfg.crop_px / 2);
        for (size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) candidates.push_back(i);
        if (candidates.empty()) raise(ErrorCode::NoForeground, "no foreground pixels to sample");
    } else {
        candidates.resize(static_cast<size_t>(image.height) * image.width);
        for (size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    }

    const int n_bins = params.net.n_bins;
    ArgMax best;
    for (int s = 0; s < cfg.n_samples; ++s) {
        const size_t idx = candidates[rng.uniform_int(candidates.size())];
        const double py = static_cast<double>(idx / image.width);
        const double px = static_cast<double>(idx % image.width);
        const ImageGrid patch =
            resize(crop_patch(image, {px, py}, cfg.crop_px), params.net.input_size);
        const TensorMap logits = forward(params, image_to_tensor(patch));
        for (int k = 0; k < n_bins; ++k) {
            // float-rounded like dense_predict so both paths rank identically
            const float q = static_cast<float>(success_probability(logits.v[2 * k], logits.v[2 * k + 1]));
            best.offer(q, py, px, k);
        }
    }

    GraspProposal p;
    p.source = ProposalSource::LearnedSampled;
    const Vec2 world = pixel_to_world(cam, {best.x, best.y});
    p.u.x = world.x;
    p.u.y = world.y;
    p.bin = best.bin;
    p.u.phi = bin_to_angle(p.bin, n_bins);
    p.score = best.score;
    return p;
}

GraspProposal dense_policy(const ModelParams& params, const ImageGrid& image,
                           const CameraModel& cam) {
    const DensePrediction dense = dense_predict(params, image);
    const int n_bins = params.net.n_bins;
    ArgMax best;
    for (int i = 0; i < dense.scores.height; ++i) {
        for (int j = 0; j < dense.scores.width; ++j) {
            const float* cell = &dense.scores.v[(static_cast<size_t>(i) * dense.scores.width + j) * n_bins];
            for (int k = 0; k < n_bins; ++k)
                best.offer(cell[k], dense.offset + i * dense.stride, dense.offset + j * dense.stride, k);
        }
    }
    GraspProposal p;
    p.source = ProposalSource::LearnedDense;
    const Vec2 world = pixel_to_world(cam, {best.x, best.y});
    p.u.x = world.x;
    p.u.y = world.y;
    p.bin = best.bin;
    p.u.phi = bin_to_angle(p.bin, n_bins);
    p.score = best.score;
    return p;
}

} // namespace grasplab

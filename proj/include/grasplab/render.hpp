#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grasplab/geometry.hpp"
#include "grasplab/scene.hpp"

namespace grasplab {

// H x W x 3 color grid, row-major, values in [0, 1].
struct ImageGrid {
    int height = 0;
    int width = 0;
    std::vector<float> values; // (row * width + col) * 3 + channel

    ImageGrid() = default;
    ImageGrid(int h, int w, float fill = 1.0f)
        : height(h), width(w), values(static_cast<size_t>(h) * w * 3, fill) {}

    float* pixel(int row, int col) { return &values[(static_cast<size_t>(row) * width + col) * 3]; }
    const float* pixel(int row, int col) const {
        return &values[(static_cast<size_t>(row) * width + col) * 3];
    }
    bool operator==(const ImageGrid&) const = default;
};

// World (mm) <-> pixel affine map: pixel = (world - origin) * scale.
// Pixel centers sit at integer coordinates + 0.5 when sampling.
struct CameraModel {
    double scale = 0.64;  // px per mm
    Vec2 origin;          // world point mapped to pixel (0, 0)
    int image_height = 256;
    int image_width = 256;

    bool covers(const Workspace& ws) const;
};

Vec2 world_to_pixel(const CameraModel& cam, Vec2 p_mm);
Vec2 pixel_to_world(const CameraModel& cam, Vec2 p_px);

struct RenderConfig {
    double noise_sigma = 0.0; // per-pixel Gaussian noise; 0 keeps rendering exact
    uint64_t noise_seed = 0;
};

// Top-down flat-color rendering: white background, objects painted in scene
// order (later objects over earlier ones), pixel-center point-in-footprint.
ImageGrid render(const Scene& scene, const CameraModel& cam, const RenderConfig& cfg = {});

// crop x crop patch centered at center_px; out-of-image area is padded white.
ImageGrid crop_patch(const ImageGrid& image, Vec2 center_px, int crop);

// bilinear resize to out_size x out_size
ImageGrid resize(const ImageGrid& image, int out_size);

// Raw image file: "IMG1" magic, u16 height, u16 width (little-endian),
// then height*width*3 little-endian float32 values.
void save_image(const ImageGrid& image, const std::string& path);
ImageGrid load_image(const std::string& path);

CameraModel desk_camera();  // 400x400 mm workspace -> 256x256 px (0.64 px/mm)
CameraModel paper_camera(); // 1280x720 px at 1.6 px/mm, workspace centered

} // namespace grasplab

#include "grasplab/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "grasplab/error.hpp"
#include "grasplab/rng.hpp"

namespace grasplab {

bool CameraModel::covers(const Workspace& ws) const {
    const Vec2 lo = world_to_pixel(*this, {ws.x_min, ws.y_min});
    const Vec2 hi = world_to_pixel(*this, {ws.x_max, ws.y_max});
    return lo.x >= 0.0 && lo.y >= 0.0 && hi.x <= image_width && hi.y <= image_height;
}

Vec2 world_to_pixel(const CameraModel& cam, Vec2 p_mm) {
    return {(p_mm.x - cam.origin.x) * cam.scale, (p_mm.y - cam.origin.y) * cam.scale};
}

Vec2 pixel_to_world(const CameraModel& cam, Vec2 p_px) {
    return {p_px.x / cam.scale + cam.origin.x, p_px.y / cam.scale + cam.origin.y};
}

ImageGrid render(const Scene& scene, const CameraModel& cam, const RenderConfig& cfg) {
    if (!cam.covers(scene.workspace))
        raise(ErrorCode::ConfigError, "camera does not cover the workspace");
    ImageGrid img(cam.image_height, cam.image_width, 1.0f);

    for (const auto& obj : scene.objects) {
        const PlacedShape fp = place_shape(obj.model.shape, obj.pose);
        // pixel-space bounding box of the footprint
        const double x_lo = -fp.support({-1.0, 0.0});
        const double x_hi = fp.support({1.0, 0.0});
        const double y_lo = -fp.support({0.0, -1.0});
        const double y_hi = fp.support({0.0, 1.0});
        const Vec2 px_lo = world_to_pixel(cam, {x_lo, y_lo});
        const Vec2 px_hi = world_to_pixel(cam, {x_hi, y_hi});
        const int col0 = std::max(0, static_cast<int>(std::floor(px_lo.x - 1.0)));
        const int col1 = std::min(cam.image_width - 1, static_cast<int>(std::ceil(px_hi.x + 1.0)));
        const int row0 = std::max(0, static_cast<int>(std::floor(px_lo.y - 1.0)));
        const int row1 = std::min(cam.image_height - 1, static_cast<int>(std::ceil(px_hi.y + 1.0)));

        const float r = static_cast<float>(obj.model.color.r);
        const float g = static_cast<float>(obj.model.color.g);
        const float b = static_cast<float>(obj.model.color.b);
        for (int row = row0; row <= row1; ++row) {
            for (int col = col0; col <= col1; ++col) {
                const Vec2 w = pixel_to_world(cam, {col + 0.5, row + 0.5});
                if (!fp.contains(w)) continue;
                float* px = img.pixel(row, col);
                px[0] = r;
                px[1] = g;
                px[2] = b;
            }
        }
    }

    if (cfg.noise_sigma > 0.0) {
        Rng rng(derive_seed(cfg.noise_seed, 0xc0ffee));
        for (float& v : img.values)
            v = std::clamp(v + static_cast<float>(cfg.noise_sigma * rng.normal()), 0.0f, 1.0f);
    }
    return img;
}

ImageGrid crop_patch(const ImageGrid& image, Vec2 center_px, int crop) {
    if (crop < 2 || crop % 2 != 0) raise(ErrorCode::ConfigError, "crop must be even and >= 2");
    ImageGrid out(crop, crop, 1.0f);
    const int cx = static_cast<int>(std::lround(center_px.x));
    const int cy = static_cast<int>(std::lround(center_px.y));
    const int row_base = cy - crop / 2;
    const int col_base = cx - crop / 2;
    for (int r = 0; r < crop; ++r) {
        const int src_row = row_base + r;
        if (src_row < 0 || src_row >= image.height) continue;
        for (int c = 0; c < crop; ++c) {
            const int src_col = col_base + c;
            if (src_col < 0 || src_col >= image.width) continue;
            std::memcpy(out.pixel(r, c), image.pixel(src_row, src_col), 3 * sizeof(float));
        }
    }
    return out;
}

ImageGrid resize(const ImageGrid& image, int out_size) {
    if (out_size < 1) raise(ErrorCode::ConfigError, "resize target must be >= 1");
    ImageGrid out(out_size, out_size, 0.0f);
    const double sy = static_cast<double>(image.height) / out_size;
    const double sx = static_cast<double>(image.width) / out_size;
    for (int r = 0; r < out_size; ++r) {
        double fy = (r + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(image.height - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, image.height - 1);
        const float wy = static_cast<float>(fy - y0);
        for (int c = 0; c < out_size; ++c) {
            double fx = (c + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(image.width - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, image.width - 1);
            const float wx = static_cast<float>(fx - x0);
            const float* p00 = image.pixel(y0, x0);
            const float* p01 = image.pixel(y0, x1);
            const float* p10 = image.pixel(y1, x0);
            const float* p11 = image.pixel(y1, x1);
            float* dst = out.pixel(r, c);
            for (int ch = 0; ch < 3; ++ch) {
                const float top = p00[ch] + (p01[ch] - p00[ch]) * wx;
                const float bot = p10[ch] + (p11[ch] - p10[ch]) * wx;
                dst[ch] = top + (bot - top) * wy;
            }
        }
    }
    return out;
}

void save_image(const ImageGrid& image, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorCode::IoError, "cannot open for writing: " + path);
    const char magic[4] = {'I', 'M', 'G', '1'};
    const uint16_t h = static_cast<uint16_t>(image.height);
    const uint16_t w = static_cast<uint16_t>(image.width);
    f.write(magic, 4);
    f.write(reinterpret_cast<const char*>(&h), 2);
    f.write(reinterpret_cast<const char*>(&w), 2);
    f.write(reinterpret_cast<const char*>(image.values.data()),
            static_cast<std::streamsize>(image.values.size() * sizeof(float)));
    if (!f) raise(ErrorCode::IoError, "write failed: " + path);
}

ImageGrid load_image(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(ErrorCode::IoError, "cannot open for reading: " + path);
    char magic[4];
    uint16_t h = 0, w = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&h), 2);
    f.read(reinterpret_cast<char*>(&w), 2);
    if (!f || std::memcmp(magic, "IMG1", 4) != 0)
        raise(ErrorCode::IoError, "not an IMG1 file: " + path);
    ImageGrid img(h, w, 0.0f);
    f.read(reinterpret_cast<char*>(img.values.data()),
           static_cast<std::streamsize>(img.values.size() * sizeof(float)));
    if (!f) raise(ErrorCode::IoError, "truncated IMG1 file: " + path);
    return img;
}

CameraModel desk_camera() {
    CameraModel cam;
    cam.scale = 0.64;
    cam.origin = {0.0, 0.0};
    cam.image_height = 256;
    cam.image_width = 256;
    return cam;
}

CameraModel paper_camera() {
    CameraModel cam;
    cam.scale = 1.6;
    cam.image_width = 1280;
    cam.image_height = 720;
    // center a 400x400 mm workspace in the frame
    cam.origin = {-(1280.0 / 1.6 - 400.0) / 2.0, -(720.0 / 1.6 - 400.0) / 2.0};
    return cam;
}

} // namespace grasplab

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqhn {

/// Image tensor shape, channel-major storage: index = (c * height + y) * width + x.
struct Shape {
    int channels = 0;
    int height = 0;
    int width = 0;

    int size() const { return channels * height * width; }
    bool operator==(const Shape&) const = default;
};

/// A single image in [0,1] with an optional per-pixel missing mask.
/// An empty mask means "all pixels observed".
struct Pattern {
    Shape shape;
    std::vector<float> values;
    std::vector<std::uint8_t> missing;

    bool has_missing() const { return !missing.empty(); }
    bool pixel_missing(int i) const { return !missing.empty() && missing[i] != 0; }
};

/// Ordered collection of images sharing one shape. Labels are optional
/// (empty or one per image) and drive class-incremental stream grouping.
/// Domain ids appear when batches are combined from several files and drive
/// domain-incremental grouping.
struct PatternBatch {
    Shape shape;
    std::vector<std::vector<float>> images;
    std::vector<std::uint32_t> labels;
    std::vector<std::uint32_t> domains;

    std::size_t size() const { return images.size(); }
    bool has_labels() const { return !labels.empty(); }
    bool has_domains() const { return !domains.empty(); }

    Pattern pattern(std::size_t i) const {
        return Pattern{shape, images.at(i), {}};
    }
};

} // namespace sqhn

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace ratesculpt {

// Mono audio. Samples are nominally in [-1, 1].
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = 44100;

    AudioBuffer() = default;
    AudioBuffer(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    double duration_seconds() const noexcept {
        return static_cast<double>(samples.size()) / sample_rate;
    }

    // Throws InvalidInput when the rate is not positive or a sample is not finite.
    void validate() const;
};

// Successive fixed-length analysis windows; the last one may be shorter.
struct WindowGrid {
    double window_ms = 100.0;
    std::vector<std::size_t> boundaries;  // n_windows + 1 entries, 0 .. len

    std::size_t n_windows() const noexcept {
        return boundaries.empty() ? 0 : boundaries.size() - 1;
    }
    std::size_t window_length(std::size_t i) const { return boundaries[i + 1] - boundaries[i]; }
};

WindowGrid make_grid(const AudioBuffer& buffer, double window_ms = 100.0);

// Grid built from explicit boundaries (used for uneven regions such as a context/word split).
WindowGrid make_segment_grid(std::size_t length, std::vector<std::size_t> boundaries);

AudioBuffer read_wav(const std::filesystem::path& path);

enum class WavFormat { Pcm16, Float32 };
void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
               WavFormat format = WavFormat::Float32);

std::vector<char> encode_wav(const AudioBuffer& buffer, WavFormat format = WavFormat::Float32);
AudioBuffer decode_wav(std::span<const char> bytes);

double rms(std::span<const double> x);
double peak(std::span<const double> x);

}  // namespace ratesculpt

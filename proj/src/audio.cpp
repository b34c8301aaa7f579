#include "ratesculpt/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "ratesculpt/error.hpp"

namespace ratesculpt {

void AudioBuffer::validate() const {
    require(sample_rate > 0, "sample rate must be positive");
    for (double s : samples) require(std::isfinite(s), "audio contains non-finite samples");
}

WindowGrid make_grid(const AudioBuffer& buffer, double window_ms) {
    require(!buffer.empty(), "cannot build a window grid over an empty buffer");
    require(window_ms > 0.0, "window_ms must be positive");
    buffer.validate();

    const double window_samples = window_ms * buffer.sample_rate / 1000.0;
    // Tolerate float noise so 0.4 s / 100 ms gives 4, not 5.
    const double exact = buffer.size() / window_samples;
    const auto n = static_cast<std::size_t>(std::ceil(exact - 1e-9));

    WindowGrid grid;
    grid.window_ms = window_ms;
    grid.boundaries.reserve(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        grid.boundaries.push_back(static_cast<std::size_t>(std::llround(i * window_samples)));
    grid.boundaries.push_back(buffer.size());
    return grid;
}

WindowGrid make_segment_grid(std::size_t length, std::vector<std::size_t> boundaries) {
    require(boundaries.size() >= 2, "segment grid needs at least one segment");
    require(boundaries.front() == 0 && boundaries.back() == length,
            "segment grid must span the whole buffer");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        require(boundaries[i] > boundaries[i - 1], "segment boundaries must be strictly increasing");
    WindowGrid grid;
    grid.window_ms = 0.0;
    grid.boundaries = std::move(boundaries);
    return grid;
}

namespace {

template <typename T>
void put(std::vector<char>& out, T value) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(std::span<const char> in, std::size_t offset) {
    if (offset + sizeof(T) > in.size()) fail(ErrorCode::InvalidInput, "truncated WAV data");
    T value;
    std::memcpy(&value, in.data() + offset, sizeof(T));
    return value;
}

}  // namespace

std::vector<char> encode_wav(const AudioBuffer& buffer, WavFormat format) {
    const bool is_float = format == WavFormat::Float32;
    const std::uint16_t bits = is_float ? 32 : 16;
    const std::uint16_t block_align = bits / 8;
    const auto data_bytes = static_cast<std::uint32_t>(buffer.size() * block_align);

    std::vector<char> out;
    out.reserve(44 + data_bytes);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put<std::uint32_t>(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put<std::uint32_t>(out, 16);
    put<std::uint16_t>(out, is_float ? 3 : 1);
    put<std::uint16_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate) * block_align);
    put<std::uint16_t>(out, block_align);
    put<std::uint16_t>(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put<std::uint32_t>(out, data_bytes);
    for (double s : buffer.samples) {
        const double c = std::clamp(s, -1.0, 1.0);
        if (is_float)
            put<float>(out, static_cast<float>(c));
        else
            put<std::int16_t>(out, static_cast<std::int16_t>(std::lround(c * 32767.0)));
    }
    return out;
}

AudioBuffer decode_wav(std::span<const char> bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(ErrorCode::InvalidInput, "not a RIFF/WAVE file");

    std::uint16_t format_tag = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string id(bytes.data() + pos, 4);
        const auto size = get<std::uint32_t>(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt ") {
            format_tag = get<std::uint16_t>(bytes, body);
            channels = get<std::uint16_t>(bytes, body + 2);
            rate = get<std::uint32_t>(bytes, body + 4);
            bits = get<std::uint16_t>(bytes, body + 14);
            if (format_tag == 0xFFFE && size >= 26)  // WAVE_FORMAT_EXTENSIBLE
                format_tag = get<std::uint16_t>(bytes, body + 24);
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) fail(ErrorCode::InvalidInput, "WAV data chunk before fmt chunk");
            if (channels != 1) fail(ErrorCode::InvalidInput, "only mono WAV is supported");
            const std::size_t n_bytes = std::min<std::size_t>(size, bytes.size() - body);
            AudioBuffer out;
            out.sample_rate = static_cast<int>(rate);
            if (format_tag == 1 && bits == 16) {
                out.samples.resize(n_bytes / 2);
                for (std::size_t i = 0; i < out.samples.size(); ++i)
                    out.samples[i] = get<std::int16_t>(bytes, body + 2 * i) / 32768.0;
            } else if (format_tag == 3 && bits == 32) {
                out.samples.resize(n_bytes / 4);
                for (std::size_t i = 0; i < out.samples.size(); ++i)
                    out.samples[i] = get<float>(bytes, body + 4 * i);
            } else {
                fail(ErrorCode::InvalidInput, "unsupported WAV encoding (need 16-bit PCM or 32-bit float)");
            }
            return out;
        }
        pos = body + size + (size & 1u);
    }
    fail(ErrorCode::InvalidInput, "WAV file has no data chunk");
}

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& buffer, WavFormat format) {
    const auto bytes = encode_wav(buffer, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / x.size());
}

double peak(std::span<const double> x) {
    double p = 0.0;
    for (double v : x) p = std::max(p, std::abs(v));
    return p;
}

}  // namespace ratesculpt

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skelsign {

enum class GestureLabel : int { mono = 0, bi = 1 };

const char* to_string(GestureLabel label);
// "mono" / "bi", case-insensitive
std::optional<GestureLabel> parse_label(std::string_view text);

// One motion-capture recording: per-frame xyz coordinates for every joint
// plus a strictly increasing timestamp per frame.
struct SkeletonSequence {
    std::string name;
    std::size_t joint_count = 0;
    std::vector<std::vector<double>> frames;  // each of length 3 * joint_count
    std::vector<double> timestamps;           // seconds

    std::size_t length() const { return frames.size(); }
    std::size_t frame_width() const { return 3 * joint_count; }
};

// Fixed-size training view of a sequence: rows past original_length are zero.
// The timestamp column is parse-time metadata and is not part of the grid.
struct PaddedSample {
    std::string name;
    std::size_t joint_count = 0;
    std::size_t rows = 0;             // padded length
    std::size_t original_length = 0;
    std::vector<double> grid;         // rows x (3 * joint_count), row-major
    std::optional<GestureLabel> label;

    std::size_t width() const { return 3 * joint_count; }
};

// CSV layout: column 0 = time in seconds, then x,y,z per joint. An optional
// header row is detected by a non-numeric first cell.
SkeletonSequence parse_skeleton_csv(std::istream& in, const std::string& name = "");
SkeletonSequence parse_skeleton_file(const std::filesystem::path& path);

PaddedSample pad_sequence(const SkeletonSequence& seq, std::size_t rows);
std::vector<double> flatten(const PaddedSample& sample);

// labels file: `name,label` per line, label in {Mono, Bi} (case-insensitive)
std::map<std::string, GestureLabel> load_labels(const std::filesystem::path& path);

// Parses every *.csv under dir (sorted by name), pads to the longest length
// (or rows_override when nonzero) and attaches labels.
std::vector<PaddedSample> load_dataset(const std::filesystem::path& dir,
                                       const std::filesystem::path& labels_path,
                                       std::size_t rows_override = 0);

enum class SplitScheme { sl, ssl };

const char* to_string(SplitScheme scheme);
std::optional<SplitScheme> parse_scheme(std::string_view text);

struct DatasetSplits {
    SplitScheme scheme = SplitScheme::sl;
    std::uint64_t seed = 0;
    std::vector<PaddedSample> train;
    std::vector<PaddedSample> validation;
    std::vector<PaddedSample> test;
    std::vector<PaddedSample> unsupervised;  // ssl only; reused as test
};

// sl: floor(60%) train / floor(10%) validation / remainder test.
// ssl: 5 train / 5 validation / remainder unsupervised == test, with both
// labelled splits containing each class (partition resampled until true).
DatasetSplits split_dataset(const std::vector<PaddedSample>& samples, SplitScheme scheme,
                            std::uint64_t seed);

}  // namespace skelsign

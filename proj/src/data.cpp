#include "skelsign/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "skelsign/rng.hpp"
#include "skelsign/tensor.hpp"

namespace skelsign {

const char* to_string(GestureLabel label) {
    return label == GestureLabel::mono ? "Mono" : "Bi";
}

std::optional<GestureLabel> parse_label(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "mono") return GestureLabel::mono;
    if (lower == "bi") return GestureLabel::bi;
    return std::nullopt;
}

const char* to_string(SplitScheme scheme) {
    return scheme == SplitScheme::sl ? "sl" : "ssl";
}

std::optional<SplitScheme> parse_scheme(std::string_view text) {
    if (text == "sl") return SplitScheme::sl;
    if (text == "ssl") return SplitScheme::ssl;
    return std::nullopt;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string_view trimmed(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view text, double& out) {
    text = trimmed(text);
    if (text.empty()) return false;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

[[noreturn]] void parse_fail(const std::string& name, std::size_t row, std::size_t col,
                             const std::string& what) {
    throw std::runtime_error("parse error in " + (name.empty() ? "<stream>" : name) + " at row " +
                             std::to_string(row) + ", column " + std::to_string(col) + ": " +
                             what);
}

[[noreturn]] void format_fail(const std::string& name, const std::string& what) {
    throw std::runtime_error("format error in " + (name.empty() ? "<stream>" : name) + ": " +
                             what);
}

}  // namespace

SkeletonSequence parse_skeleton_csv(std::istream& in, const std::string& name) {
    SkeletonSequence seq;
    seq.name = name;
    std::string line;
    std::size_t row = 0;
    std::size_t expected_cols = 0;
    bool first_data_row = true;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        double t = 0.0;
        if (first_data_row && !parse_double(cells[0], t)) {
            continue;  // header row
        }
        if (first_data_row) {
            if (cells.size() < 4 || (cells.size() - 1) % 3 != 0) {
                format_fail(name, std::to_string(cells.size()) +
                                      " columns; expected 1 timestamp column plus a multiple "
                                      "of 3 coordinate columns");
            }
            expected_cols = cells.size();
            seq.joint_count = (cells.size() - 1) / 3;
            first_data_row = false;
        } else if (cells.size() != expected_cols) {
            format_fail(name, "row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " columns, expected " +
                                  std::to_string(expected_cols));
        }
        if (!parse_double(cells[0], t)) {
            parse_fail(name, row, 1, "non-numeric timestamp '" + cells[0] + "'");
        }
        if (!seq.timestamps.empty() && t <= seq.timestamps.back()) {
            format_fail(name, "timestamps not strictly increasing at row " + std::to_string(row));
        }
        std::vector<double> frame(expected_cols - 1);
        for (std::size_t c = 1; c < expected_cols; ++c) {
            double v = 0.0;
            if (!parse_double(cells[c], v)) {
                parse_fail(name, row, c + 1, "non-numeric coordinate '" + cells[c] + "'");
            }
            if (!std::isfinite(v)) {
                parse_fail(name, row, c + 1, "non-finite coordinate");
            }
            frame[c - 1] = v;
        }
        seq.timestamps.push_back(t);
        seq.frames.push_back(std::move(frame));
    }
    if (seq.frames.empty()) {
        format_fail(name, "no data rows");
    }
    return seq;
}

SkeletonSequence parse_skeleton_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("i/o error: cannot open " + path.string());
    }
    return parse_skeleton_csv(in, path.stem().string());
}

PaddedSample pad_sequence(const SkeletonSequence& seq, std::size_t rows) {
    require(rows >= 1, "padded length must be positive");
    if (seq.length() > rows) {
        throw std::length_error("sequence " + seq.name + " has " + std::to_string(seq.length()) +
                                " frames, longer than padded length " + std::to_string(rows));
    }
    PaddedSample sample;
    sample.name = seq.name;
    sample.joint_count = seq.joint_count;
    sample.rows = rows;
    sample.original_length = seq.length();
    sample.grid.assign(rows * seq.frame_width(), 0.0);
    for (std::size_t f = 0; f < seq.length(); ++f) {
        std::copy(seq.frames[f].begin(), seq.frames[f].end(),
                  sample.grid.begin() + f * seq.frame_width());
    }
    return sample;
}

std::vector<double> flatten(const PaddedSample& sample) {
    return sample.grid;  // stored row-major already: frame 0 first
}

std::map<std::string, GestureLabel> load_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("i/o error: cannot open label file " + path.string());
    }
    std::map<std::string, GestureLabel> labels;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 2) {
            format_fail(path.string(), "label row " + std::to_string(row) +
                                           " must be `name,label`, got " +
                                           std::to_string(cells.size()) + " cells");
        }
        const std::string name(trimmed(cells[0]));
        if (row == 1 && !parse_label(trimmed(cells[1]))) {
            continue;  // header row
        }
        const auto label = parse_label(trimmed(cells[1]));
        if (!label) {
            format_fail(path.string(), "unknown label '" + cells[1] + "' at row " +
                                           std::to_string(row));
        }
        labels[name] = *label;
    }
    return labels;
}

std::vector<PaddedSample> load_dataset(const std::filesystem::path& dir,
                                       const std::filesystem::path& labels_path,
                                       std::size_t rows_override) {
    const std::map<std::string, GestureLabel> labels = load_labels(labels_path);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        // the label file may live inside the data directory
        std::error_code ec;
        if (std::filesystem::equivalent(entry.path(), labels_path, ec)) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<SkeletonSequence> sequences;
    sequences.reserve(files.size());
    std::size_t longest = 0;
    for (const auto& file : files) {
        sequences.push_back(parse_skeleton_file(file));
        longest = std::max(longest, sequences.back().length());
    }
    const std::size_t rows = rows_override ? rows_override : longest;

    std::vector<PaddedSample> samples;
    samples.reserve(sequences.size());
    for (const auto& seq : sequences) {
        const auto it = labels.find(seq.name);
        if (it == labels.end()) {
            throw std::runtime_error("labeling error: no label for sample '" + seq.name + "' in " +
                                     labels_path.string());
        }
        PaddedSample sample = pad_sequence(seq, rows);
        sample.label = it->second;
        samples.push_back(std::move(sample));
    }
    return samples;
}

namespace {

bool has_both_classes(const std::vector<PaddedSample>& samples,
                      const std::vector<std::size_t>& order, std::size_t begin,
                      std::size_t end) {
    bool mono = false, bi = false;
    for (std::size_t i = begin; i < end; ++i) {
        if (samples[order[i]].label == GestureLabel::mono) mono = true;
        if (samples[order[i]].label == GestureLabel::bi) bi = true;
    }
    return mono && bi;
}

std::vector<PaddedSample> take(const std::vector<PaddedSample>& samples,
                               const std::vector<std::size_t>& order, std::size_t begin,
                               std::size_t end) {
    std::vector<PaddedSample> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.push_back(samples[order[i]]);
    return out;
}

}  // namespace

DatasetSplits split_dataset(const std::vector<PaddedSample>& samples, SplitScheme scheme,
                            std::uint64_t seed) {
    DatasetSplits splits;
    splits.scheme = scheme;
    splits.seed = seed;
    const std::size_t n = samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(seed, 0x5117));

    if (scheme == SplitScheme::sl) {
        require(n >= 4, "sl split needs at least 4 samples, got " + std::to_string(n));
        rng.shuffle(order);
        const std::size_t n_train = n * 60 / 100;
        const std::size_t n_val = n * 10 / 100;
        splits.train = take(samples, order, 0, n_train);
        splits.validation = take(samples, order, n_train, n_train + n_val);
        splits.test = take(samples, order, n_train + n_val, n);
        return splits;
    }

    if (n < 12) {
        throw std::invalid_argument("ssl split needs at least 12 samples, got " +
                                    std::to_string(n));
    }
    // 5 train / 5 validation; both labelled splits must carry each class
    for (int attempt = 0; attempt < 10000; ++attempt) {
        rng.shuffle(order);
        if (has_both_classes(samples, order, 0, 5) && has_both_classes(samples, order, 5, 10)) {
            splits.train = take(samples, order, 0, 5);
            splits.validation = take(samples, order, 5, 10);
            splits.unsupervised = take(samples, order, 10, n);
            splits.test = splits.unsupervised;
            return splits;
        }
    }
    throw std::invalid_argument(
        "ssl split could not find a class-balanced partition; dataset needs at least two "
        "samples of each class");
}

}  // namespace skelsign

#include "skelsign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "format_util.hpp"
#include "skelsign/tensor.hpp"

namespace skelsign {

namespace {

constexpr double kTau = 6.283185307179586476925287;

// arc oscillation count range; fast enough that a moving hand's displacement
// dwarfs the idle-noise displacement at the default noise level
constexpr double kOscMin = 10.0;
constexpr double kOscMax = 14.0;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

// Fixed rest pose. Rest joints span a torso/legs/head column; hands sit low
// at the sides.
Vec3 base_position(const JointRoleMap& roles, std::size_t joint) {
    for (std::size_t k = 0; k < roles.left_hand.size(); ++k) {
        if (roles.left_hand[k] == joint) {
            return {-0.45 + 0.02 * static_cast<double>(k % 5),
                    0.45 + 0.015 * static_cast<double>(k / 5),
                    0.12 + 0.01 * static_cast<double>(k % 3)};
        }
    }
    for (std::size_t k = 0; k < roles.right_hand.size(); ++k) {
        if (roles.right_hand[k] == joint) {
            return {0.45 - 0.02 * static_cast<double>(k % 5),
                    0.45 + 0.015 * static_cast<double>(k / 5),
                    0.12 + 0.01 * static_cast<double>(k % 3)};
        }
    }
    for (std::size_t k = 0; k < roles.rest.size(); ++k) {
        if (roles.rest[k] == joint) {
            const double frac = roles.rest.size() > 1
                                    ? static_cast<double>(k) /
                                          static_cast<double>(roles.rest.size() - 1)
                                    : 0.0;
            return {0.05 * std::sin(3.0 * static_cast<double>(k)),
                    1.6 * frac,
                    0.05 * std::cos(2.0 * static_cast<double>(k))};
        }
    }
    throw std::invalid_argument("joint index " + std::to_string(joint) + " not in role map");
}

struct Arc {
    double freq[3];
    double phase[3];
};

Arc draw_arc(Rng& rng) {
    Arc arc{};
    for (int a = 0; a < 3; ++a) {
        arc.freq[a] = rng.uniform(kOscMin, kOscMax);
        arc.phase[a] = rng.uniform(0.0, kTau);
    }
    return arc;
}

// Offset of a moving hand's centre at progress u in [0, 1]: an up-and-back
// lift plus three sinusoidal components.
Vec3 arc_offset(const Arc& arc, double amplitude, double u) {
    return {0.5 * amplitude * std::sin(kTau * arc.freq[0] * u + arc.phase[0]),
            0.8 * amplitude * std::sin(3.141592653589793 * u) +
                0.35 * amplitude * std::sin(kTau * arc.freq[1] * u + arc.phase[1]),
            0.5 * amplitude * std::sin(kTau * arc.freq[2] * u + arc.phase[2])};
}

enum class Role { rest, left, right };

struct SampleLayout {
    JointRoleMap roles;
    std::vector<Role> role;  // per joint
    std::vector<Vec3> base;  // per joint
};

SampleLayout make_layout(const SynthConfig& cfg) {
    SampleLayout layout;
    layout.roles = JointRoleMap::for_joint_count(cfg.joints);
    layout.role.assign(cfg.joints, Role::rest);
    for (std::size_t j : layout.roles.left_hand) layout.role[j] = Role::left;
    for (std::size_t j : layout.roles.right_hand) layout.role[j] = Role::right;
    layout.base.resize(cfg.joints);
    for (std::size_t j = 0; j < cfg.joints; ++j) {
        layout.base[j] = base_position(layout.roles, j);
    }
    return layout;
}

SkeletonSequence assemble(const SynthConfig& cfg, Rng& rng, const SampleLayout& layout,
                          bool move_left, bool move_right, bool raise_idle) {
    SkeletonSequence seq;
    seq.joint_count = cfg.joints;
    require(cfg.min_frames >= 1 && cfg.min_frames <= cfg.max_frames,
            "frame range must satisfy 1 <= min <= max");
    require(cfg.noise_sigma >= 0.0, "noise sigma must be >= 0");
    const std::size_t frames =
        cfg.min_frames + static_cast<std::size_t>(rng.below(cfg.max_frames - cfg.min_frames + 1));

    const Vec3 offset{rng.uniform(-cfg.position_jitter, cfg.position_jitter),
                      rng.uniform(-cfg.position_jitter, cfg.position_jitter),
                      rng.uniform(-cfg.position_jitter, cfg.position_jitter)};
    const Arc left_arc = draw_arc(rng);
    const Arc right_arc = draw_arc(rng);

    // The ambiguous pose parks the idle hand at the moving hand's mean height.
    double idle_lift = 0.0;
    if (raise_idle) {
        const Arc& moving = move_left ? left_arc : right_arc;
        double mean_dy = 0.0;
        for (std::size_t f = 0; f < frames; ++f) {
            const double u = frames > 1
                                 ? static_cast<double>(f) / static_cast<double>(frames - 1)
                                 : 0.0;
            mean_dy += arc_offset(moving, cfg.motion_amplitude, u).y;
        }
        idle_lift = mean_dy / static_cast<double>(frames);
    }

    seq.frames.reserve(frames);
    seq.timestamps.reserve(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        const double u =
            frames > 1 ? static_cast<double>(f) / static_cast<double>(frames - 1) : 0.0;
        std::vector<double> row(3 * cfg.joints);
        for (std::size_t j = 0; j < cfg.joints; ++j) {
            Vec3 p = layout.base[j];
            const bool on_left = layout.role[j] == Role::left;
            const bool on_right = layout.role[j] == Role::right;
            if ((on_left && move_left) || (on_right && move_right)) {
                const Vec3 d = arc_offset(on_left ? left_arc : right_arc,
                                          cfg.motion_amplitude, u);
                p.x += d.x;
                p.y += d.y;
                p.z += d.z;
            } else if ((on_left || on_right) && raise_idle) {
                p.y += idle_lift;
            }
            row[3 * j] = p.x + offset.x + rng.gaussian(0.0, cfg.noise_sigma);
            row[3 * j + 1] = p.y + offset.y + rng.gaussian(0.0, cfg.noise_sigma);
            row[3 * j + 2] = p.z + offset.z + rng.gaussian(0.0, cfg.noise_sigma);
        }
        seq.frames.push_back(std::move(row));
        seq.timestamps.push_back(static_cast<double>(f) / cfg.frame_rate_hz);
    }
    return seq;
}

}  // namespace

JointRoleMap JointRoleMap::for_joint_count(std::size_t joints) {
    require(joints >= 2, "role map needs at least 2 joints");
    const std::size_t hand = std::max<std::size_t>(1, (joints + 2) / 4);
    require(2 * hand <= joints, "role map hand size too large for joint count");
    JointRoleMap roles;
    for (std::size_t j = 0; j < joints - 2 * hand; ++j) roles.rest.push_back(j);
    for (std::size_t j = joints - 2 * hand; j < joints - hand; ++j) roles.left_hand.push_back(j);
    for (std::size_t j = joints - hand; j < joints; ++j) roles.right_hand.push_back(j);
    return roles;
}

SkeletonSequence generate_sample(GestureLabel label, const SynthConfig& cfg, Rng& rng) {
    const SampleLayout layout = make_layout(cfg);
    if (label == GestureLabel::bi) {
        return assemble(cfg, rng, layout, true, true, false);
    }
    const bool move_left = rng.coin();
    return assemble(cfg, rng, layout, move_left, !move_left, false);
}

SkeletonSequence make_ambiguous_sample(const SynthConfig& cfg, Rng& rng) {
    const SampleLayout layout = make_layout(cfg);
    const bool move_left = rng.coin();
    return assemble(cfg, rng, layout, move_left, !move_left, true);
}

GeneratedDataset generate_dataset(std::size_t count, const SynthConfig& cfg,
                                  std::uint64_t seed) {
    require(count >= 2, "dataset needs at least 2 samples");
    GeneratedDataset ds;
    const auto mono_count =
        static_cast<std::size_t>(std::lround(static_cast<double>(count) * cfg.mono_fraction));
    ds.labels.assign(count, GestureLabel::bi);
    for (std::size_t i = 0; i < std::min(mono_count, count); ++i) {
        ds.labels[i] = GestureLabel::mono;
    }
    Rng label_rng(mix_seed(seed, 1));
    label_rng.shuffle(ds.labels);

    std::size_t width = 1;
    for (std::size_t c = count - 1; c >= 10; c /= 10) ++width;
    width = std::max<std::size_t>(width, 3);

    ds.sequences.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(mix_seed(seed, 1000 + i));
        SkeletonSequence seq = generate_sample(ds.labels[i], cfg, rng);
        std::string num = std::to_string(i);
        seq.name = "sample_" + std::string(width - std::min(width, num.size()), '0') + num;
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

void write_sequence_csv(const SkeletonSequence& seq, std::ostream& os) {
    os << "time";
    for (std::size_t j = 0; j < seq.joint_count; ++j) {
        os << ",j" << j << "_x,j" << j << "_y,j" << j << "_z";
    }
    os << '\n';
    for (std::size_t f = 0; f < seq.length(); ++f) {
        os << format_double(seq.timestamps[f]);
        for (double v : seq.frames[f]) {
            os << ',' << format_double(v);
        }
        os << '\n';
    }
}

void write_dataset(const GeneratedDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const SkeletonSequence& seq : dataset.sequences) {
        std::ofstream os(dir / (seq.name + ".csv"));
        if (!os) {
            throw std::runtime_error("i/o error: cannot write " +
                                     (dir / (seq.name + ".csv")).string());
        }
        write_sequence_csv(seq, os);
        if (!os) throw std::runtime_error("i/o error while writing " + seq.name + ".csv");
    }
    std::ofstream labels(dir / "labels.csv");
    if (!labels) {
        throw std::runtime_error("i/o error: cannot write " + (dir / "labels.csv").string());
    }
    for (std::size_t i = 0; i < dataset.sequences.size(); ++i) {
        labels << dataset.sequences[i].name << ',' << to_string(dataset.labels[i]) << '\n';
    }
    if (!labels) throw std::runtime_error("i/o error while writing labels.csv");
}

double hand_displacement(const SkeletonSequence& seq,
                         std::span<const std::size_t> hand_joints) {
    double total = 0.0;
    for (std::size_t f = 1; f < seq.length(); ++f) {
        double step_sq = 0.0;
        for (std::size_t j : hand_joints) {
            for (std::size_t a = 0; a < 3; ++a) {
                const double d = seq.frames[f][3 * j + a] - seq.frames[f - 1][3 * j + a];
                step_sq += d * d;
            }
        }
        total += std::sqrt(step_sq);
    }
    return total;
}

}  // namespace skelsign

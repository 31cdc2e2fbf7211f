// skelsign: synthetic gesture data, classifier training (supervised and
// self-supervised), evaluation and grad-cam style joint attribution on 3-d
// skeleton sequences.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "skelsign/data.hpp"
#include "skelsign/gradcam.hpp"
#include "skelsign/kernels.hpp"
#include "skelsign/models.hpp"
#include "skelsign/synth.hpp"
#include "skelsign/training.hpp"

namespace fs = std::filesystem;
using namespace skelsign;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SKELSIGN_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 1;
}

void print_confusion(const std::array<std::array<std::size_t, 2>, 2>& confusion) {
    std::cout << "confusion (rows = actual Mono/Bi, cols = predicted):\n";
    std::cout << "  " << confusion[0][0] << " " << confusion[0][1] << "\n";
    std::cout << "  " << confusion[1][0] << " " << confusion[1][1] << "\n";
}

void print_evaluation(const Evaluation& ev) {
    std::cout << "accuracy = " << ev.accuracy << "\n";
    print_confusion(ev.confusion);
    std::cout << "misclassified =";
    for (const std::string& name : ev.misclassified) std::cout << " " << name;
    std::cout << "\n";
}

struct HpFlags {
    std::size_t epochs = 30;
    std::size_t batch_size = 8;
    double learning_rate = 1e-3;
    std::string optimizer = "adam";
    double tau = 0.5;
    double lambda = 0.0;

    HyperParams to_params(std::uint64_t seed) const {
        HyperParams hp;
        hp.epochs = epochs;
        hp.batch_size = batch_size;
        hp.learning_rate = learning_rate;
        const auto opt = parse_optimizer(optimizer);
        if (!opt) throw CLI::ValidationError("--optimizer must be adam or sgd");
        hp.optimizer = *opt;
        hp.contrastive_tau = tau;
        hp.contrastive_weight = lambda;
        hp.seed = seed;
        return hp;
    }
};

void add_hp_flags(CLI::App* cmd, HpFlags& hp, bool with_contrastive) {
    cmd->add_option("--epochs", hp.epochs, "training epochs");
    cmd->add_option("--batch", hp.batch_size, "mini-batch size");
    cmd->add_option("--lr", hp.learning_rate, "learning rate");
    cmd->add_option("--optimizer", hp.optimizer, "adam|sgd");
    if (with_contrastive) {
        cmd->add_option("--tau", hp.tau, "contrastive temperature");
        cmd->add_option("--lambda", hp.lambda, "contrastive weight (0 disables)");
    }
}

ModelSpec spec_for_dataset(ModelKind kind, const std::vector<PaddedSample>& samples) {
    ModelSpec spec;
    spec.kind = kind;
    spec.max_frames = samples.front().rows;
    spec.joints = samples.front().joint_count;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gesture recognition on 3-d skeleton sequences"};
    app.require_subcommand(1);

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic labelled dataset");
    std::size_t synth_count = 111;
    std::uint64_t synth_seed = default_seed();
    std::string synth_out;
    SynthConfig cfg;
    synth->add_option("--count", synth_count, "number of samples");
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--joints", cfg.joints, "joints per skeleton");
    synth->add_option("--min-frames", cfg.min_frames, "shortest sequence");
    synth->add_option("--max-frames", cfg.max_frames, "longest sequence");
    synth->add_option("--noise", cfg.noise_sigma, "coordinate noise sigma");
    synth->add_option("--amplitude", cfg.motion_amplitude, "arc amplitude");
    synth->add_option("--jitter", cfg.position_jitter, "per-sample body offset range");
    synth->add_option("--balance", cfg.mono_fraction, "fraction of Mono samples");

    // ---- train ----
    auto* train = app.add_subcommand("train", "supervised training");
    std::string train_model = "cnn", train_data, train_labels, train_out, train_scheme = "sl";
    std::uint64_t train_seed = default_seed();
    std::size_t train_rows_override = 0;
    HpFlags train_hp;
    train->add_option("--model", train_model, "fc|cnn|lstm")->required();
    train->add_option("--data", train_data, "dataset directory")->required();
    train->add_option("--labels", train_labels, "labels csv (default <data>/labels.csv)");
    train->add_option("--scheme", train_scheme, "split scheme: sl|ssl");
    train->add_option("--seed", train_seed, "split/init/shuffle seed");
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--rows", train_rows_override, "padded length override");
    add_hp_flags(train, train_hp, false);

    // ---- ssl ----
    auto* ssl = app.add_subcommand(
        "ssl", "self-supervised pipeline plus its matched low-label baseline");
    std::string ssl_data, ssl_labels, ssl_out;
    std::uint64_t ssl_seed = default_seed();
    std::size_t ssl_unsup_epochs = 12;
    HpFlags ssl_hp;
    ssl_hp.epochs = 30;
    ssl->add_option("--data", ssl_data, "dataset directory")->required();
    ssl->add_option("--labels", ssl_labels, "labels csv (default <data>/labels.csv)");
    ssl->add_option("--seed", ssl_seed, "pipeline seed");
    ssl->add_option("--out", ssl_out, "output directory")->required();
    ssl->add_option("--unsup-epochs", ssl_unsup_epochs, "reconstruction pretraining epochs");
    add_hp_flags(ssl, ssl_hp, true);

    // ---- gradcam ----
    auto* gradcam = app.add_subcommand("gradcam", "joint attribution for a cnn checkpoint");
    std::string gc_checkpoint, gc_sample, gc_out;
    int gc_class = -1;
    std::size_t gc_k = 10;
    gradcam->add_option("--checkpoint", gc_checkpoint, "trained cnn checkpoint")->required();
    gradcam->add_option("--sample", gc_sample, "skeleton csv file")->required();
    gradcam->add_option("--out", gc_out, "output directory")->required();
    gradcam->add_option("--class", gc_class, "class to attribute (default: predicted)");
    gradcam->add_option("--k", gc_k, "top joints per frame");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a labelled dataset");
    std::string eval_checkpoint, eval_data, eval_labels;
    eval->add_option("--checkpoint", eval_checkpoint, "model checkpoint")->required();
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--labels", eval_labels, "labels csv (default <data>/labels.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) {
            if (synth_count < 2) {
                std::cerr << "usage error: --count must be at least 2\n";
                return 2;
            }
            const GeneratedDataset ds = generate_dataset(synth_count, cfg, synth_seed);
            write_dataset(ds, synth_out);
            std::size_t mono = 0, longest = 0;
            for (std::size_t i = 0; i < ds.labels.size(); ++i) {
                if (ds.labels[i] == GestureLabel::mono) ++mono;
                longest = std::max(longest, ds.sequences[i].length());
            }
            std::cout << "seed = " << synth_seed << "\n";
            std::cout << "samples = " << ds.sequences.size() << " (" << mono << " Mono, "
                      << ds.sequences.size() - mono << " Bi)\n";
            std::cout << "longest sequence = " << longest << " frames\n";
            std::cout << "wrote " << synth_out << "\n";
            return 0;
        }

        if (train->parsed()) {
            const auto kind = parse_model_kind(train_model);
            if (!kind || *kind == ModelKind::autoencoder) {
                std::cerr << "usage error: --model must be fc, cnn or lstm\n";
                return 2;
            }
            const auto scheme = parse_scheme(train_scheme);
            if (!scheme) {
                std::cerr << "usage error: --scheme must be sl or ssl\n";
                return 2;
            }
            if (train_labels.empty()) train_labels = (fs::path(train_data) / "labels.csv").string();
            const auto samples = load_dataset(train_data, train_labels, train_rows_override);
            const DatasetSplits splits =
                split_dataset(samples, *scheme, mix_seed(train_seed, 1));
            ModelSpec spec = spec_for_dataset(*kind, samples);
            spec.seed = mix_seed(train_seed, 2);
            Model model = build_model(spec);
            HyperParams hp = train_hp.to_params(mix_seed(train_seed, 3));
            TrainReport report = train_supervised(model, splits, hp);
            report.seed = train_seed;  // echo the user-facing seed

            fs::create_directories(train_out);
            report.write_file(fs::path(train_out) / "report.txt");
            save_model(model, fs::path(train_out) / "model.ckpt");
            std::cout << "seed = " << train_seed << "\n";
            std::cout << "simd = " << kernels::level_name(kernels::active_level()) << "\n";
            std::cout << "model = " << train_model << ", scheme = " << train_scheme << "\n";
            std::cout << "train/val/test = " << report.train_count << "/" << report.val_count
                      << "/" << report.test_count << "\n";
            std::cout << "test accuracy = " << report.test_accuracy << "\n";
            std::cout << "test+val accuracy = " << report.test_val_accuracy << "\n";
            print_confusion(report.confusion);
            std::cout << "misclassified =";
            for (const std::string& name : report.misclassified) std::cout << " " << name;
            std::cout << "\n";
            std::cout << "wall seconds = " << report.wall_seconds << "\n";
            std::cout << "wrote " << train_out << "/report.txt and model.ckpt\n";
            return 0;
        }

        if (ssl->parsed()) {
            if (ssl_labels.empty()) ssl_labels = (fs::path(ssl_data) / "labels.csv").string();
            const auto samples = load_dataset(ssl_data, ssl_labels, 0);
            ModelSpec ae_spec = spec_for_dataset(ModelKind::autoencoder, samples);
            HyperParams hp_unsup = ssl_hp.to_params(0);
            hp_unsup.epochs = ssl_unsup_epochs;
            HyperParams hp_sup = ssl_hp.to_params(0);
            hp_sup.contrastive_weight = 0.0;  // downstream task is plain supervised

            // pretrained route and the matched baseline (identical seeds, zero
            // pretraining epochs)
            SslResult pretrained =
                run_ssl_pipeline(samples, ae_spec, hp_unsup, hp_sup, ssl_seed);
            HyperParams hp_none = hp_unsup;
            hp_none.epochs = 0;
            SslResult baseline = run_ssl_pipeline(samples, ae_spec, hp_none, hp_sup, ssl_seed);

            fs::create_directories(ssl_out);
            pretrained.pretext.write_file(fs::path(ssl_out) / "pretext_report.txt");
            pretrained.downstream.write_file(fs::path(ssl_out) / "ssl_report.txt");
            baseline.downstream.write_file(fs::path(ssl_out) / "baseline_report.txt");
            save_model(pretrained.classifier, fs::path(ssl_out) / "ssl_model.ckpt");

            std::cout << "seed = " << ssl_seed << "\n";
            std::cout << "simd = " << kernels::level_name(kernels::active_level()) << "\n";
            std::cout << "splits = " << pretrained.downstream.train_count << " train / "
                      << pretrained.downstream.val_count << " validation / "
                      << pretrained.downstream.test_count
                      << " unsupervised (reused as test)\n";
            std::cout << "supervised(10% labels) accuracy = "
                      << baseline.downstream.test_accuracy << "\n";
            std::cout << "ssl accuracy = " << pretrained.downstream.test_accuracy << "\n";
            std::cout << "wrote " << ssl_out << "/{pretext,ssl,baseline}_report.txt\n";
            return 0;
        }

        if (gradcam->parsed()) {
            const Model model = load_model(gc_checkpoint);
            if (model.spec.kind != ModelKind::cnn) {
                std::cerr << "gradcam requires cnn, checkpoint holds "
                          << to_string(model.spec.kind) << "\n";
                return 1;
            }
            const SkeletonSequence seq = parse_skeleton_file(gc_sample);
            PaddedSample sample = pad_sequence(seq, model.spec.max_frames);
            std::optional<std::size_t> cls;
            if (gc_class >= 0) {
                if (gc_class > 1) {
                    std::cerr << "usage error: --class must be 0 or 1\n";
                    return 2;
                }
                cls = static_cast<std::size_t>(gc_class);
            }
            const GradCamResult result = grad_cam(model, sample, cls, gc_k);
            export_result(result, gc_out);
            std::cout << "sample = " << sample.name << "\n";
            std::cout << "predicted class = " << result.predicted_class << " ("
                      << to_string(static_cast<GestureLabel>(result.predicted_class)) << ")\n";
            std::cout << "attributed class = " << result.class_index << "\n";
            std::cout << "wrote " << gc_out << "/heatmap.csv and top_joints.txt\n";
            return 0;
        }

        if (eval->parsed()) {
            if (eval_labels.empty()) eval_labels = (fs::path(eval_data) / "labels.csv").string();
            const Model model = load_model(eval_checkpoint);
            const auto samples = load_dataset(eval_data, eval_labels, model.spec.max_frames);
            if (samples.empty()) {
                std::cerr << "usage error: dataset directory is empty\n";
                return 2;
            }
            print_evaluation(evaluate(model, samples));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

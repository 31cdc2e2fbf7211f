#include "skelsign/training.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "format_util.hpp"
#include "skelsign/kernels.hpp"
#include "skelsign/rng.hpp"

namespace skelsign {

const char* to_string(OptimizerKind kind) {
    return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view text) {
    if (text == "sgd") return OptimizerKind::sgd;
    if (text == "adam") return OptimizerKind::adam;
    return std::nullopt;
}

// -------------------------------------------------------------- optimizer --

Optimizer::Optimizer(const Model& model, const HyperParams& hp) : hp_(hp) {
    require(hp.learning_rate >= 0.0, "learning rate must be >= 0");
    require(hp.batch_size >= 1, "batch size must be >= 1");
    if (hp.optimizer == OptimizerKind::adam) {
        m_.reserve(model.params.size());
        v_.reserve(model.params.size());
        for (const Param& p : model.params) {
            m_.emplace_back(p.tensor.numel(), 0.0);
            v_.emplace_back(p.tensor.numel(), 0.0);
        }
    }
}

void Optimizer::step(Model& model) {
    if (hp_.weight_decay != 0.0) {
        for (Param& p : model.params) {
            kernels::vec_axpy(p.tensor.grad.data(), hp_.weight_decay,
                              p.tensor.values.data(), p.tensor.numel());
        }
    }
    if (hp_.optimizer == OptimizerKind::sgd) {
        for (Param& p : model.params) {
            kernels::vec_axpy(p.tensor.values.data(), -hp_.learning_rate,
                              p.tensor.grad.data(), p.tensor.numel());
        }
        return;
    }
    ++t_;
    const double bc1 = 1.0 / (1.0 - std::pow(hp_.adam_beta1, static_cast<double>(t_)));
    const double bc2 = 1.0 / (1.0 - std::pow(hp_.adam_beta2, static_cast<double>(t_)));
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        Tensor& t = model.params[i].tensor;
        kernels::adam_step(t.values.data(), m_[i].data(), v_[i].data(), t.grad.data(),
                           t.numel(), hp_.learning_rate, hp_.adam_beta1, hp_.adam_beta2,
                           hp_.adam_eps, bc1, bc2);
    }
}

// -------------------------------------------------------------- evaluate ---

namespace {

std::size_t argmax_class(const std::vector<double>& logits) {
    // ties break toward class 0
    return logits[1] > logits[0] ? 1 : 0;
}

GestureLabel require_label(const PaddedSample& sample) {
    if (!sample.label) {
        throw std::invalid_argument("sample '" + sample.name + "' carries no label");
    }
    return *sample.label;
}

}  // namespace

Evaluation evaluate(const Model& model, const std::vector<PaddedSample>& samples) {
    require(!samples.empty(), "evaluate on an empty sample list");
    Evaluation ev;
    double loss_sum = 0.0;
    for (const PaddedSample& sample : samples) {
        const auto actual = static_cast<std::size_t>(require_label(sample));
        const std::vector<double> logits = model_logits(model, sample);
        const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, actual);
        loss_sum += ce.loss;
        const std::size_t predicted = argmax_class(logits);
        ev.confusion[actual][predicted] += 1;
        if (predicted != actual) ev.misclassified.push_back(sample.name);
    }
    const std::size_t correct = ev.confusion[0][0] + ev.confusion[1][1];
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    ev.mean_loss = loss_sum / static_cast<double>(samples.size());
    return ev;
}

// ------------------------------------------------------- train supervised --

namespace {

// Per-sample forward + (optionally) backward; returns loss and correctness.
struct StepResult {
    double loss = 0.0;
    bool correct = false;
};

StepResult supervised_step(Model& model, const PaddedSample& sample, double grad_scale,
                           bool backward) {
    const auto target = static_cast<std::size_t>(require_label(sample));
    StepResult r;
    switch (model.spec.kind) {
        case ModelKind::fc: {
            FcContext ctx;
            const std::vector<double> logits = fc_forward(model, flatten(sample), &ctx);
            const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, target);
            r.loss = ce.loss;
            r.correct = argmax_class(logits) == target;
            if (backward) {
                fc_backward(model, ctx, softmax_cross_entropy_grad(ce, target, grad_scale));
            }
            break;
        }
        case ModelKind::cnn: {
            CnnContext ctx;
            const std::vector<double> logits = cnn_forward(model, sample_grid(sample), &ctx);
            const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, target);
            r.loss = ce.loss;
            r.correct = argmax_class(logits) == target;
            if (backward) {
                cnn_backward(model, ctx, softmax_cross_entropy_grad(ce, target, grad_scale));
            }
            break;
        }
        case ModelKind::lstm: {
            LstmContext ctx;
            const std::vector<double> logits =
                lstm_model_forward(model, sample_rows(sample), &ctx);
            const SoftmaxCrossEntropy ce = softmax_cross_entropy(logits, target);
            r.loss = ce.loss;
            r.correct = argmax_class(logits) == target;
            if (backward) {
                lstm_model_backward(model, ctx,
                                    softmax_cross_entropy_grad(ce, target, grad_scale));
            }
            break;
        }
        case ModelKind::autoencoder:
            throw std::invalid_argument("supervised training needs a classifier model");
    }
    return r;
}

}  // namespace

TrainReport train_supervised(Model& model, const DatasetSplits& splits,
                             const HyperParams& hp) {
    const auto start = std::chrono::steady_clock::now();
    require(!splits.train.empty(), "training split is empty");
    require(!splits.test.empty(), "test split is empty");
    for (const auto* part : {&splits.train, &splits.validation, &splits.test}) {
        for (const PaddedSample& s : *part) require_label(s);
    }

    TrainReport report;
    report.seed = hp.seed;
    report.model = to_string(model.spec.kind);
    report.scheme = to_string(splits.scheme);
    report.optimizer = to_string(hp.optimizer);
    report.epochs = hp.epochs;
    report.batch_size = hp.batch_size;
    report.learning_rate = hp.learning_rate;
    report.train_count = splits.train.size();
    report.val_count = splits.validation.size();
    report.test_count = splits.test.size();

    Optimizer opt(model, hp);
    std::vector<std::size_t> order(splits.train.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> sample_loss(order.size());
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        Rng rng(mix_seed(hp.seed, epoch));
        rng.shuffle(order);
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += hp.batch_size) {
            const std::size_t end = std::min(order.size(), begin + hp.batch_size);
            const double grad_scale = 1.0 / static_cast<double>(end - begin);
            model.zero_grads();
            for (std::size_t i = begin; i < end; ++i) {
                const StepResult r =
                    supervised_step(model, splits.train[order[i]], grad_scale, true);
                sample_loss[order[i]] = r.loss;
                correct += r.correct ? 1 : 0;
            }
            opt.step(model);
        }
        // summed in dataset order so the curve is independent of the shuffle
        double loss_sum = 0.0;
        for (double l : sample_loss) loss_sum += l;
        report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
        report.train_accuracy.push_back(static_cast<double>(correct) /
                                        static_cast<double>(order.size()));
        if (!splits.validation.empty()) {
            const Evaluation ev = evaluate(model, splits.validation);
            report.val_loss.push_back(ev.mean_loss);
            report.val_accuracy.push_back(ev.accuracy);
        } else {
            report.val_loss.push_back(0.0);
            report.val_accuracy.push_back(0.0);
        }
    }

    const Evaluation test_ev = evaluate(model, splits.test);
    report.test_accuracy = test_ev.accuracy;
    report.confusion = test_ev.confusion;
    report.misclassified = test_ev.misclassified;
    if (!splits.validation.empty()) {
        std::vector<PaddedSample> both = splits.test;
        both.insert(both.end(), splits.validation.begin(), splits.validation.end());
        report.test_val_accuracy = evaluate(model, both).accuracy;
    } else {
        report.test_val_accuracy = test_ev.accuracy;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// -------------------------------------------------------- contrastive loss --

namespace {

double vec_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

struct ContrastiveWork {
    std::size_t n = 0;
    std::vector<double> norms;
    std::vector<std::vector<double>> sim;  // cosine similarities, sim[i][j]
    std::vector<std::vector<std::size_t>> positives;
    std::vector<std::size_t> anchors;  // indices with a nonempty positive set
};

ContrastiveWork contrastive_setup(const std::vector<std::vector<double>>& latents,
                                  const std::vector<int>& labels) {
    require(latents.size() >= 2, "contrastive loss needs at least 2 samples");
    require(latents.size() == labels.size(), "latents/labels size mismatch");
    ContrastiveWork w;
    w.n = latents.size();
    const std::size_t dim = latents[0].size();
    w.norms.resize(w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
        require(latents[i].size() == dim, "latent dimensionality is inconsistent");
        w.norms[i] = vec_norm(latents[i]);
        require(w.norms[i] > 0.0, "contrastive loss needs nonzero latents");
    }
    w.sim.assign(w.n, std::vector<double>(w.n, 0.0));
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t j = i + 1; j < w.n; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dim; ++d) dot += latents[i][d] * latents[j][d];
            const double s = dot / (w.norms[i] * w.norms[j]);
            w.sim[i][j] = s;
            w.sim[j][i] = s;
        }
    }
    w.positives.resize(w.n);
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t j = 0; j < w.n; ++j) {
            if (j != i && labels[j] == labels[i]) w.positives[i].push_back(j);
        }
        if (!w.positives[i].empty()) w.anchors.push_back(i);
    }
    if (w.anchors.empty()) {
        throw std::invalid_argument(
            "contrastive loss: batch has no positive pair; batches must be label-balanced");
    }
    return w;
}

// loss per anchor: -(1/|P|) sum_p s_ip/tau + logsumexp_a(s_ia/tau)
double contrastive_eval(const ContrastiveWork& w, double tau,
                        std::vector<std::vector<double>>* dsim) {
    double total = 0.0;
    const double inv_anchors = 1.0 / static_cast<double>(w.anchors.size());
    if (dsim) dsim->assign(w.n, std::vector<double>(w.n, 0.0));
    for (std::size_t i : w.anchors) {
        double max_arg = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < w.n; ++j) {
            if (j != i) max_arg = std::max(max_arg, w.sim[i][j] / tau);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < w.n; ++j) {
            if (j != i) z += std::exp(w.sim[i][j] / tau - max_arg);
        }
        const double log_z = max_arg + std::log(z);
        const double inv_p = 1.0 / static_cast<double>(w.positives[i].size());
        double pos_term = 0.0;
        for (std::size_t p : w.positives[i]) pos_term += w.sim[i][p] / tau;
        total += -inv_p * pos_term + log_z;
        if (dsim) {
            for (std::size_t j = 0; j < w.n; ++j) {
                if (j == i) continue;
                const double q = std::exp(w.sim[i][j] / tau - max_arg) / z;
                (*dsim)[i][j] += inv_anchors * q / tau;
            }
            for (std::size_t p : w.positives[i]) {
                (*dsim)[i][p] -= inv_anchors * inv_p / tau;
            }
        }
    }
    return total * inv_anchors;
}

}  // namespace

double contrastive_loss(const std::vector<std::vector<double>>& latents,
                        const std::vector<int>& labels, double tau) {
    require(tau > 0.0, "contrastive temperature must be positive");
    const ContrastiveWork w = contrastive_setup(latents, labels);
    return contrastive_eval(w, tau, nullptr);
}

double contrastive_loss_grad(const std::vector<std::vector<double>>& latents,
                             const std::vector<int>& labels, double tau,
                             std::vector<std::vector<double>>& dlatents) {
    require(tau > 0.0, "contrastive temperature must be positive");
    const ContrastiveWork w = contrastive_setup(latents, labels);
    std::vector<std::vector<double>> dsim;
    const double loss = contrastive_eval(w, tau, &dsim);
    const std::size_t dim = latents[0].size();
    dlatents.assign(w.n, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t j = 0; j < w.n; ++j) {
            if (j == i) continue;
            const double g = dsim[i][j];
            if (g == 0.0) continue;
            // d cos(z_i, z_j) / dz_i = z_j/(|z_i||z_j|) - cos * z_i/|z_i|^2
            const double inv_ij = 1.0 / (w.norms[i] * w.norms[j]);
            const double s = w.sim[i][j];
            const double inv_ii = 1.0 / (w.norms[i] * w.norms[i]);
            const double inv_jj = 1.0 / (w.norms[j] * w.norms[j]);
            for (std::size_t d = 0; d < dim; ++d) {
                dlatents[i][d] += g * (latents[j][d] * inv_ij - s * latents[i][d] * inv_ii);
                dlatents[j][d] += g * (latents[i][d] * inv_ij - s * latents[j][d] * inv_jj);
            }
        }
    }
    return loss;
}

// --------------------------------------------------- reconstruction train ---

namespace {

// Round-robin interleave of the two classes so every batch (of size >= 3)
// contains a positive pair for the contrastive term.
std::vector<std::size_t> balanced_order(const std::vector<PaddedSample>& samples, Rng& rng) {
    std::vector<std::size_t> mono, bi;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (require_label(samples[i]) == GestureLabel::mono) {
            mono.push_back(i);
        } else {
            bi.push_back(i);
        }
    }
    rng.shuffle(mono);
    rng.shuffle(bi);
    std::vector<std::size_t> order;
    order.reserve(samples.size());
    std::size_t a = 0, b = 0;
    while (a < mono.size() || b < bi.size()) {
        if (a < mono.size()) order.push_back(mono[a++]);
        if (b < bi.size()) order.push_back(bi[b++]);
    }
    return order;
}

}  // namespace

TrainReport train_reconstruction(Model& autoencoder, const std::vector<PaddedSample>& samples,
                                 const HyperParams& hp) {
    const auto start = std::chrono::steady_clock::now();
    require(autoencoder.spec.kind == ModelKind::autoencoder,
            "train_reconstruction expects an autoencoder");
    require(!samples.empty(), "train_reconstruction on an empty dataset");
    const bool contrastive = hp.contrastive_weight != 0.0;

    TrainReport report;
    report.seed = hp.seed;
    report.model = to_string(autoencoder.spec.kind);
    report.scheme = "unsupervised";
    report.optimizer = to_string(hp.optimizer);
    report.epochs = hp.epochs;
    report.batch_size = hp.batch_size;
    report.learning_rate = hp.learning_rate;
    report.train_count = samples.size();

    Optimizer opt(autoencoder, hp);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        Rng rng(mix_seed(hp.seed, epoch));
        if (contrastive) {
            order = balanced_order(samples, rng);
        } else {
            rng.shuffle(order);
        }
        // batch boundaries; merge a tail that cannot hold a positive pair
        std::vector<std::pair<std::size_t, std::size_t>> batches;
        for (std::size_t begin = 0; begin < order.size(); begin += hp.batch_size) {
            batches.emplace_back(begin, std::min(order.size(), begin + hp.batch_size));
        }
        if (contrastive && batches.size() > 1 && batches.back().second - batches.back().first < 3) {
            batches[batches.size() - 2].second = batches.back().second;
            batches.pop_back();
        }

        std::vector<double> sample_mse(order.size());
        double contrastive_sum = 0.0;  // weighted by batch size
        for (const auto& [begin, end] : batches) {
            const std::size_t batch_n = end - begin;
            const double grad_scale = 1.0 / static_cast<double>(batch_n);
            autoencoder.zero_grads();
            std::vector<AutoencoderContext> ctxs(batch_n);
            std::vector<Tensor> targets;
            targets.reserve(batch_n);
            std::vector<std::vector<double>> latents(batch_n);
            std::vector<int> labels(batch_n);
            for (std::size_t i = 0; i < batch_n; ++i) {
                const PaddedSample& sample = samples[order[begin + i]];
                targets.push_back(sample_grid(sample));
                const AutoencoderOut out =
                    autoencoder_forward(autoencoder, targets.back(), &ctxs[i]);
                latents[i] = out.latent;
                if (contrastive) labels[i] = static_cast<int>(require_label(sample));
                sample_mse[order[begin + i]] = mse_loss(ctxs[i].dec_conv_out.back(),
                                                        targets.back());
            }
            std::vector<std::vector<double>> dlatents;
            if (contrastive) {
                const double closs =
                    contrastive_loss_grad(latents, labels, hp.contrastive_tau, dlatents);
                contrastive_sum +=
                    hp.contrastive_weight * closs * static_cast<double>(batch_n);
            }
            for (std::size_t i = 0; i < batch_n; ++i) {
                mse_loss_backward(ctxs[i].dec_conv_out.back(), targets[i], grad_scale);
                if (contrastive) {
                    kernels::vec_scale(dlatents[i].data(), hp.contrastive_weight,
                                       dlatents[i].size());
                    autoencoder_backward(autoencoder, ctxs[i], dlatents[i]);
                } else {
                    autoencoder_backward(autoencoder, ctxs[i], {});
                }
            }
            opt.step(autoencoder);
        }
        // per-sample terms summed in dataset order (shuffle-independent)
        double loss_sum = contrastive_sum;
        for (double l : sample_mse) loss_sum += l;
        report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// ------------------------------------------------------------ ssl pipeline --

SslResult run_ssl_pipeline(const std::vector<PaddedSample>& samples,
                           const ModelSpec& autoencoder_spec, const HyperParams& hp_unsup,
                           const HyperParams& hp_sup, std::uint64_t seed) {
    require(autoencoder_spec.kind == ModelKind::autoencoder,
            "run_ssl_pipeline expects an autoencoder spec");
    DatasetSplits splits = split_dataset(samples, SplitScheme::ssl, mix_seed(seed, 1));

    ModelSpec ae_spec = autoencoder_spec;
    ae_spec.seed = mix_seed(seed, 2);
    Model autoencoder = build_model(ae_spec);

    HyperParams hp_u = hp_unsup;
    hp_u.seed = mix_seed(seed, 3);
    SslResult result{train_reconstruction(autoencoder, splits.unsupervised, hp_u),
                     TrainReport{},
                     extract_encoder(autoencoder, mix_seed(seed, 4))};

    DatasetSplits downstream;
    downstream.scheme = SplitScheme::ssl;
    downstream.seed = splits.seed;
    downstream.train = splits.train;
    downstream.validation = splits.validation;
    downstream.test = splits.unsupervised;  // unsupervised data reused as test
    HyperParams hp_s = hp_sup;
    hp_s.seed = mix_seed(seed, 5);
    result.downstream = train_supervised(result.classifier, downstream, hp_s);
    return result;
}

// ----------------------------------------------------------------- report ---

namespace {

void write_kv(std::ostream& os, const char* key, const std::string& value) {
    os << key << " = " << value << "\n";
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += v[i];
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    if (text.empty()) return out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc()) {
            throw std::runtime_error("report parse error: bad number '" + cell + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> parse_strings(const std::string& text) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    std::istringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

void TrainReport::write(std::ostream& os) const {
    write_kv(os, "report_version", "1");
    write_kv(os, "seed", std::to_string(seed));
    write_kv(os, "model", model);
    write_kv(os, "scheme", scheme);
    write_kv(os, "optimizer", optimizer);
    write_kv(os, "epochs", std::to_string(epochs));
    write_kv(os, "batch_size", std::to_string(batch_size));
    write_kv(os, "learning_rate", format_double(learning_rate));
    write_kv(os, "train_count", std::to_string(train_count));
    write_kv(os, "val_count", std::to_string(val_count));
    write_kv(os, "test_count", std::to_string(test_count));
    write_kv(os, "train_loss", join_doubles(train_loss));
    write_kv(os, "train_accuracy", join_doubles(train_accuracy));
    write_kv(os, "val_loss", join_doubles(val_loss));
    write_kv(os, "val_accuracy", join_doubles(val_accuracy));
    write_kv(os, "test_accuracy", format_double(test_accuracy));
    write_kv(os, "test_val_accuracy", format_double(test_val_accuracy));
    write_kv(os, "confusion",
             std::to_string(confusion[0][0]) + "," + std::to_string(confusion[0][1]) + "," +
                 std::to_string(confusion[1][0]) + "," + std::to_string(confusion[1][1]));
    write_kv(os, "misclassified", join_strings(misclassified));
}

void TrainReport::write_file(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("i/o error: cannot write " + path.string());
    write(os);
    if (!os) throw std::runtime_error("i/o error while writing " + path.string());
}

TrainReport TrainReport::read(std::istream& is) {
    TrainReport r;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const std::size_t sep = line.find(" = ");
        if (sep == std::string::npos) {
            throw std::runtime_error("report parse error: missing ' = ' in '" + line + "'");
        }
        const std::string key = line.substr(0, sep);
        const std::string value = line.substr(sep + 3);
        if (key == "report_version") {
            if (value != "1") throw std::runtime_error("unsupported report version " + value);
        } else if (key == "seed") {
            r.seed = std::stoull(value);
        } else if (key == "model") {
            r.model = value;
        } else if (key == "scheme") {
            r.scheme = value;
        } else if (key == "optimizer") {
            r.optimizer = value;
        } else if (key == "epochs") {
            r.epochs = std::stoul(value);
        } else if (key == "batch_size") {
            r.batch_size = std::stoul(value);
        } else if (key == "learning_rate") {
            r.learning_rate = parse_doubles(value).at(0);
        } else if (key == "train_count") {
            r.train_count = std::stoul(value);
        } else if (key == "val_count") {
            r.val_count = std::stoul(value);
        } else if (key == "test_count") {
            r.test_count = std::stoul(value);
        } else if (key == "train_loss") {
            r.train_loss = parse_doubles(value);
        } else if (key == "train_accuracy") {
            r.train_accuracy = parse_doubles(value);
        } else if (key == "val_loss") {
            r.val_loss = parse_doubles(value);
        } else if (key == "val_accuracy") {
            r.val_accuracy = parse_doubles(value);
        } else if (key == "test_accuracy") {
            r.test_accuracy = parse_doubles(value).at(0);
        } else if (key == "test_val_accuracy") {
            r.test_val_accuracy = parse_doubles(value).at(0);
        } else if (key == "confusion") {
            const std::vector<double> c = parse_doubles(value);
            if (c.size() != 4) throw std::runtime_error("report parse error: confusion needs 4 entries");
            r.confusion[0][0] = static_cast<std::size_t>(c[0]);
            r.confusion[0][1] = static_cast<std::size_t>(c[1]);
            r.confusion[1][0] = static_cast<std::size_t>(c[2]);
            r.confusion[1][1] = static_cast<std::size_t>(c[3]);
        } else if (key == "misclassified") {
            r.misclassified = parse_strings(value);
        } else {
            throw std::runtime_error("report parse error: unknown key '" + key + "'");
        }
    }
    return r;
}

TrainReport TrainReport::read_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("i/o error: cannot read " + path.string());
    return read(is);
}

}  // namespace skelsign

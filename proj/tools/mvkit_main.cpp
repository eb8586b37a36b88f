// mvkit command line tool: thin orchestration over the mvkit core library.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvkit/augmentation.hpp"
#include "mvkit/error.hpp"
#include "mvkit/metrics.hpp"
#include "mvkit/motion_io.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/run_config.hpp"
#include "mvkit/skeleton.hpp"
#include "mvkit/smoothing.hpp"
#include "mvkit/synthetic.hpp"
#include "mvkit/vae.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mvkit;

namespace {

void emit_report(const json& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot open report file for writing: " + out_path);
    out << doc.dump(2) << "\n";
}

void write_json_file(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << doc.dump(2) << "\n";
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError(std::string(what) + " " + path + " is not valid JSON: " + e.what());
    }
    return doc;
}

Skeleton skeleton_from_flag(const std::string& path) {
    return path.empty() ? default_skeleton() : load_skeleton(path);
}

std::string sanitize_stem(const std::string& name) {
    std::string s;
    s.reserve(name.size());
    for (char c : name) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) != 0 ||
                          c == '-' || c == '_' || c == '.';
        s += keep ? c : '_';
    }
    return s.empty() ? std::string("seq") : s;
}

const char* extension_for(MotionFileFormat f) {
    return f == MotionFileFormat::Binary ? ".mvkt" : ".json";
}

json sequence_summary(const MotionSequence& seq) {
    return json{{"frames", seq.frame_count()},
                {"joints", seq.joint_count()},
                {"fps", seq.fps}};
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

struct ConvertOpts {
    std::string in, out;
    std::string format = "bin";
    std::string repr = "axis_angle";
};

int run_convert(const ConvertOpts& o) {
    const MotionSequence seq = read_motion(o.in);
    const MotionFileFormat fmt = motion_file_format_from_string(o.format);
    const RotationFormat repr = rotation_format_from_string(o.repr);
    write_motion(o.out, seq, fmt, repr);
    json rep{{"command", "convert"},
             {"input", o.in},
             {"output", o.out},
             {"format", to_string(fmt)},
             {"representation", to_string(repr)}};
    rep.update(sequence_summary(seq));
    emit_report(rep, "");
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
    std::string kind = "single_axis_sine";
    std::string out;
    std::string format = "bin";
    SyntheticParams params;
    uint64_t seed = 0;
};

int run_synth(const SynthOpts& o) {
    const MotionSequence seq =
        generate_synthetic(synthetic_kind_from_string(o.kind), o.params, o.seed);
    const MotionFileFormat fmt = motion_file_format_from_string(o.format);
    write_motion(o.out, seq, fmt);
    json rep{{"command", "synth"},
             {"kind", o.kind},
             {"output", o.out},
             {"seed", o.seed}};
    rep.update(sequence_summary(seq));
    emit_report(rep, "");
    return 0;
}

// ---------------------------------------------------------------------------
// augment
// ---------------------------------------------------------------------------

struct AugmentOpts {
    std::vector<std::string> inputs;
    std::string out_dir;
    std::string config_path;
    std::string skeleton_path;
    std::string format = "bin";
    std::vector<double> speeds;
    bool flip = false;
    int root_rotations = -1;  // -1: not set on the command line
    uint64_t seed = 0;
    bool seed_set = false;
};

int run_augment(const AugmentOpts& o) {
    AugmentConfig cfg;
    if (!o.config_path.empty()) cfg = load_run_config(o.config_path).augment;
    if (!o.speeds.empty()) cfg.speed_factors = o.speeds;
    if (o.flip) cfg.enable_flip = true;
    if (o.root_rotations >= 0) cfg.root_rotation_samples = o.root_rotations;
    if (o.seed_set) cfg.rng_seed = o.seed;
    cfg.validate();

    const Skeleton skel = skeleton_from_flag(o.skeleton_path);
    std::vector<MotionSequence> seqs;
    seqs.reserve(o.inputs.size());
    for (const auto& path : o.inputs) seqs.push_back(read_motion(path));

    const std::vector<MotionSequence> expanded = augment_dataset(seqs, cfg, skel);
    const MotionFileFormat fmt = motion_file_format_from_string(o.format);
    fs::create_directories(o.out_dir);

    json files = json::array();
    for (size_t i = 0; i < expanded.size(); ++i) {
        char prefix[16];
        std::snprintf(prefix, sizeof prefix, "%03zu_", i);
        const std::string fname =
            prefix + sanitize_stem(expanded[i].name) + extension_for(fmt);
        write_motion((fs::path(o.out_dir) / fname).string(), expanded[i], fmt);
        files.push_back(json{{"name", expanded[i].name},
                             {"file", fname},
                             {"frames", expanded[i].frame_count()}});
    }
    emit_report(json{{"command", "augment"},
                     {"inputs", o.inputs},
                     {"out_dir", o.out_dir},
                     {"count", static_cast<int>(expanded.size())},
                     {"files", files}},
                "");
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
    std::string pred, gt;
    std::string skeleton_path;
    std::string out;
};

int run_evaluate(const EvaluateOpts& o) {
    const Skeleton skel = skeleton_from_flag(o.skeleton_path);
    const MetricsReport m = compute_metrics(fk_sequence(skel, read_motion(o.pred)),
                                            fk_sequence(skel, read_motion(o.gt)));
    emit_report(json{{"mpjpe_mm", m.mpjpe_mm},
                     {"pa_mpjpe_mm", m.pa_mpjpe_mm},
                     {"accel_err_mm_s2", m.accel_err_mm_s2},
                     {"frames", m.frames},
                     {"joints", m.joints},
                     {"fps", m.fps}},
                o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// smooth
// ---------------------------------------------------------------------------

struct SmoothOpts {
    std::string in, out;
    std::string config_path;
    std::string format = "bin";
    double ratio = 0.5;
    bool ratio_set = false;
};

int run_smooth(const SmoothOpts& o) {
    double ratio = 0.5;
    if (!o.config_path.empty()) ratio = load_run_config(o.config_path).smooth_ratio;
    if (o.ratio_set) ratio = o.ratio;

    const MotionSequence out = slerp_average_filter(read_motion(o.in), ratio);
    const MotionFileFormat fmt = motion_file_format_from_string(o.format);
    write_motion(o.out, out, fmt);
    json rep{{"command", "smooth"},
             {"input", o.in},
             {"output", o.out},
             {"ratio", ratio}};
    rep.update(sequence_summary(out));
    emit_report(rep, "");
    return 0;
}

// ---------------------------------------------------------------------------
// window / stitch
// ---------------------------------------------------------------------------

struct WindowOpts {
    std::string in, out_dir;
    std::string config_path;
    std::string format = "bin";
    WindowSpec spec;
    bool width_set = false, stride_set = false;
};

int run_window(const WindowOpts& o) {
    WindowSpec spec;
    if (!o.config_path.empty()) spec = load_run_config(o.config_path).window;
    if (o.width_set) spec.width = o.spec.width;
    if (o.stride_set) spec.stride = o.spec.stride;
    spec.validate();

    const MotionSequence seq = read_motion(o.in);
    const WindowSet ws = sliding_windows(seq, spec);
    const MotionFileFormat fmt = motion_file_format_from_string(o.format);
    fs::create_directories(o.out_dir);

    const std::string stem =
        sanitize_stem(seq.name.empty() ? fs::path(o.in).stem().string() : seq.name);
    json windows = json::array();
    for (size_t k = 0; k < ws.windows.size(); ++k) {
        char suffix[24];
        std::snprintf(suffix, sizeof suffix, "_w%03zu", k);
        const std::string fname = stem + suffix + extension_for(fmt);
        write_motion((fs::path(o.out_dir) / fname).string(), ws.windows[k], fmt);
        windows.push_back(json{{"start", ws.map.placements[k].start},
                               {"padding", ws.map.placements[k].padding},
                               {"file", fname}});
    }
    const json index{{"format", "mvkit/window-index"},
                     {"version", 1},
                     {"source_frames", ws.map.source_frames},
                     {"width", ws.map.width},
                     {"fps", ws.map.fps},
                     {"source_name", ws.map.source_name},
                     {"windows", windows}};
    const std::string index_path =
        (fs::path(o.out_dir) / (stem + "_windows.json")).string();
    write_json_file(index, index_path);

    emit_report(json{{"command", "window"},
                     {"input", o.in},
                     {"out_dir", o.out_dir},
                     {"index", index_path},
                     {"width", spec.width},
                     {"stride", spec.stride},
                     {"windows", static_cast<int>(ws.windows.size())},
                     {"source_frames", ws.map.source_frames}},
                "");
    return 0;
}

struct StitchOpts {
    std::string index_path, out;
    std::string config_path;
    std::string format = "bin";
    std::string policy = "take_first";
    bool policy_set = false;
};

int run_stitch(const StitchOpts& o) {
    StitchPolicy policy = StitchPolicy::TakeFirst;
    if (!o.config_path.empty()) policy = load_run_config(o.config_path).stitch_policy;
    if (o.policy_set) policy = stitch_policy_from_string(o.policy);

    const json index = read_json_file(o.index_path, "window index");
    WindowIndexMap map;
    std::vector<MotionSequence> windows;
    try {
        map.source_frames = index.at("source_frames").get<int>();
        map.width = index.at("width").get<int>();
        map.fps = index.at("fps").get<double>();
        map.source_name = index.at("source_name").get<std::string>();
        const fs::path dir = fs::path(o.index_path).parent_path();
        for (const json& w : index.at("windows")) {
            map.placements.push_back(WindowPlacement{w.at("start").get<int>(),
                                                     w.at("padding").get<int>()});
            windows.push_back(read_motion((dir / w.at("file").get<std::string>()).string()));
        }
    } catch (const json::exception& e) {
        throw DataError("window index " + o.index_path + ": " + e.what());
    }

    const MotionSequence seq = stitch_windows(windows, map, policy);
    write_motion(o.out, seq, motion_file_format_from_string(o.format));
    json rep{{"command", "stitch"},
             {"index", o.index_path},
             {"output", o.out},
             {"policy", to_string(policy)},
             {"windows", static_cast<int>(windows.size())}};
    rep.update(sequence_summary(seq));
    emit_report(rep, "");
    return 0;
}

// ---------------------------------------------------------------------------
// vae-train / vae-reconstruct / vae-gradcheck
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::vector<std::string> inputs;
    std::string model_out;
    std::string config_path;
    std::string preset;  // "", "desk", "full"
    std::string history_out;
    int window = 0, latent = 0, hidden = 0, epochs = 0, batch = 0;
    double lr = -1.0, kl_weight = -1.0;
    uint64_t seed = 0;
    bool seed_set = false;
};

int run_vae_train(const TrainOpts& o) {
    VaeConfig vc;
    if (!o.config_path.empty()) vc = load_run_config(o.config_path).vae;
    if (o.preset == "full") vc = VaeConfig::full();
    else if (o.preset == "desk") vc = VaeConfig{};
    if (o.window > 0) vc.window = o.window;
    if (o.latent > 0) vc.latent_dim = o.latent;
    if (o.hidden > 0) {
        vc.encoder_hidden = o.hidden;
        vc.decoder_hidden = o.hidden;
    }
    if (o.epochs > 0) vc.epochs = o.epochs;
    if (o.batch > 0) vc.batch_size = o.batch;
    if (o.lr >= 0.0) vc.learning_rate = o.lr;
    if (o.kl_weight >= 0.0) vc.kl_weight = o.kl_weight;
    if (o.seed_set) vc.rng_seed = o.seed;

    std::vector<MotionSequence> seqs;
    seqs.reserve(o.inputs.size());
    for (const auto& path : o.inputs) seqs.push_back(read_motion(path));
    for (const auto& s : seqs) {
        if (s.joint_count() != seqs.front().joint_count())
            throw DataError("training sequences disagree on joint count: " + s.name);
    }
    vc.input_dim = 6 * seqs.front().joint_count();
    vc.validate();

    VaeModel model = VaeModel::init(vc, vc.rng_seed);
    const std::vector<Eigen::MatrixXd> windows = build_training_windows(seqs, vc.window);
    const TrainResult result = train(model, windows);
    save_model(o.model_out, model);

    if (!o.history_out.empty()) {
        json hist = json::array();
        for (const EpochLoss& e : result.history)
            hist.push_back(json{{"total", e.total},
                                {"recon_term", e.recon_term},
                                {"kl_term", e.kl_term}});
        write_json_file(json{{"epochs", static_cast<int>(result.history.size())},
                             {"history", hist}},
                        o.history_out);
    }

    const EpochLoss last = result.history.empty() ? EpochLoss{} : result.history.back();
    emit_report(json{{"command", "vae-train"},
                     {"model", o.model_out},
                     {"sequences", static_cast<int>(seqs.size())},
                     {"windows", static_cast<int>(windows.size())},
                     {"epochs", vc.epochs},
                     {"steps", model.training_steps},
                     {"final",
                      json{{"total", last.total},
                           {"recon_term", last.recon_term},
                           {"kl_term", last.kl_term}}}},
                "");
    return 0;
}

struct ReconstructOpts {
    std::string model_path, in, out;
    std::string format = "bin";
};

int run_vae_reconstruct(const ReconstructOpts& o) {
    const VaeModel model = load_model(o.model_path);
    const MotionSequence rec = reconstruct_sequence(model, read_motion(o.in));
    write_motion(o.out, rec, motion_file_format_from_string(o.format));
    json rep{{"command", "vae-reconstruct"},
             {"model", o.model_path},
             {"input", o.in},
             {"output", o.out}};
    rep.update(sequence_summary(rec));
    emit_report(rep, "");
    return 0;
}

struct GradCheckOpts {
    int models = 20;
    double tolerance = 1e-4;
    uint64_t seed = 0;
    std::string out;
};

int run_vae_gradcheck(const GradCheckOpts& o) {
    if (o.models < 1) throw DataError("--models must be at least 1");
    GradCheckReport worst;
    int total_params = 0;
    for (int i = 0; i < o.models; ++i) {
        Rng dims(derive_seed(o.seed, static_cast<uint64_t>(i)));
        VaeConfig vc;
        vc.window = dims.uniform_int(2, 5);
        vc.input_dim = dims.uniform_int(2, 6);
        vc.latent_dim = dims.uniform_int(1, 4);
        vc.encoder_hidden = dims.uniform_int(2, 8);
        vc.decoder_hidden = dims.uniform_int(2, 8);
        vc.mlp_hidden1 = dims.uniform_int(2, 8);
        vc.mlp_hidden2 = dims.uniform_int(2, 8);
        vc.rng_seed = derive_seed(o.seed, 1000 + static_cast<uint64_t>(i));

        const VaeModel model = VaeModel::init(vc, vc.rng_seed);
        std::vector<Eigen::MatrixXd> batch;
        Rng data(derive_seed(o.seed, 2000 + static_cast<uint64_t>(i)));
        for (int b = 0; b < 2; ++b) {
            Eigen::MatrixXd w(vc.window, vc.input_dim);
            for (int r = 0; r < w.rows(); ++r)
                for (int c = 0; c < w.cols(); ++c) w(r, c) = 0.5 * data.normal();
            batch.push_back(std::move(w));
        }
        const GradCheckReport rep = gradient_check(model, batch);
        total_params += rep.parameter_count;
        if (rep.max_rel_error > worst.max_rel_error) worst = rep;
    }
    const bool passed = worst.max_rel_error < o.tolerance;
    emit_report(json{{"command", "vae-gradcheck"},
                     {"models", o.models},
                     {"tolerance", o.tolerance},
                     {"max_rel_error", worst.max_rel_error},
                     {"worst_tensor", worst.worst_tensor},
                     {"parameters_checked", total_params},
                     {"passed", passed}},
                o.out);
    return passed ? 0 : 3;
}

// ---------------------------------------------------------------------------
// skeleton-check
// ---------------------------------------------------------------------------

struct SkeletonCheckOpts {
    std::string skeleton_path;
    std::string write_path;
    std::string out;
};

int run_skeleton_check(const SkeletonCheckOpts& o) {
    const Skeleton skel = skeleton_from_flag(o.skeleton_path);
    skel.validate();
    json rep{{"command", "skeleton-check"},
             {"skeleton", o.skeleton_path.empty() ? "builtin" : o.skeleton_path},
             {"joints", skel.joint_count},
             {"has_shape_basis", skel.shape_basis.has_value()},
             {"ok", true}};
    if (!o.write_path.empty()) {
        save_skeleton(o.write_path, skel);
        rep["written"] = o.write_path;
    }
    emit_report(rep, o.out);
    return 0;
}

void add_format_flag(CLI::App* sub, std::string& target) {
    sub->add_option("--format", target, "Output file format")
        ->check(CLI::IsMember({"bin", "json"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mvkit: human motion sequence toolkit"};
    app.require_subcommand(1);
    int exit_code = 0;

    auto convert = std::make_shared<ConvertOpts>();
    {
        CLI::App* sub = app.add_subcommand("convert", "Re-encode a motion file");
        sub->add_option("--in", convert->in, "Input motion file")->required();
        sub->add_option("--out", convert->out, "Output motion file")->required();
        add_format_flag(sub, convert->format);
        sub->add_option("--repr", convert->repr, "On-disk rotation representation")
            ->check(CLI::IsMember({"axis_angle", "quaternion", "sixd"}));
        sub->callback([&, convert] { exit_code = run_convert(*convert); });
    }

    auto synth = std::make_shared<SynthOpts>();
    {
        CLI::App* sub = app.add_subcommand("synth", "Generate a synthetic motion sequence");
        sub->add_option("--kind", synth->kind, "Generator kind")
            ->check(CLI::IsMember(
                {"constant", "single_axis_sine", "multi_joint_sine", "random_walk_slerp"}));
        sub->add_option("--out", synth->out, "Output motion file")->required();
        add_format_flag(sub, synth->format);
        sub->add_option("--frames", synth->params.frames, "Frame count");
        sub->add_option("--fps", synth->params.fps, "Frames per second");
        sub->add_option("--joints", synth->params.joints, "Joint count");
        sub->add_option("--amplitude", synth->params.amplitude, "Sine amplitude, radians");
        sub->add_option("--frequency", synth->params.frequency, "Sine frequency, Hz");
        sub->add_option("--axis", synth->params.axis, "Driven rotation axis (0..2)");
        sub->add_option("--joint", synth->params.joint, "Driven joint index");
        sub->add_option("--step-rad", synth->params.step_rad, "Random-walk step, radians");
        sub->add_flag("--with-betas", synth->params.with_betas, "Attach shape coefficients");
        sub->add_flag("--with-translation", synth->params.with_translation,
                      "Attach a root trajectory");
        sub->add_option("--seed", synth->seed, "Random seed");
        sub->callback([&, synth] { exit_code = run_synth(*synth); });
    }

    auto augment = std::make_shared<AugmentOpts>();
    {
        CLI::App* sub = app.add_subcommand("augment", "Expand sequences by augmentation");
        sub->add_option("--in", augment->inputs, "Input motion files")
            ->required()
            ->expected(-1);
        sub->add_option("--out-dir", augment->out_dir, "Output directory")->required();
        sub->add_option("--config", augment->config_path, "Run configuration file");
        sub->add_option("--skeleton", augment->skeleton_path,
                        "Skeleton file (mirror map source; builtin by default)");
        add_format_flag(sub, augment->format);
        sub->add_option("--speeds", augment->speeds, "Resampling speed factors")
            ->expected(-1);
        sub->add_flag("--flip", augment->flip, "Add mirrored variants");
        sub->add_option("--root-rotations", augment->root_rotations,
                        "Extra random root-rotation copies per sequence");
        CLI::Option* seed =
            sub->add_option("--seed", augment->seed, "Random seed for root rotations");
        sub->callback([&, augment, seed] {
            augment->seed_set = seed->count() > 0;
            exit_code = run_augment(*augment);
        });
    }

    auto evaluate = std::make_shared<EvaluateOpts>();
    {
        CLI::App* sub = app.add_subcommand("evaluate", "Compare two motion files");
        sub->add_option("--pred", evaluate->pred, "Predicted motion file")->required();
        sub->add_option("--gt", evaluate->gt, "Ground-truth motion file")->required();
        sub->add_option("--skeleton", evaluate->skeleton_path,
                        "Skeleton file (builtin by default)");
        sub->add_option("--out", evaluate->out, "Report path (stdout by default)");
        sub->callback([&, evaluate] { exit_code = run_evaluate(*evaluate); });
    }

    auto smooth = std::make_shared<SmoothOpts>();
    {
        CLI::App* sub = app.add_subcommand("smooth", "Slerp-average filter a sequence");
        sub->add_option("--in", smooth->in, "Input motion file")->required();
        sub->add_option("--out", smooth->out, "Output motion file")->required();
        sub->add_option("--config", smooth->config_path, "Run configuration file");
        add_format_flag(sub, smooth->format);
        CLI::Option* ratio =
            sub->add_option("--ratio", smooth->ratio, "Interpolation ratio in [0, 1]");
        sub->callback([&, smooth, ratio] {
            smooth->ratio_set = ratio->count() > 0;
            exit_code = run_smooth(*smooth);
        });
    }

    auto window = std::make_shared<WindowOpts>();
    {
        CLI::App* sub = app.add_subcommand("window", "Split a sequence into fixed windows");
        sub->add_option("--in", window->in, "Input motion file")->required();
        sub->add_option("--out-dir", window->out_dir, "Output directory")->required();
        sub->add_option("--config", window->config_path, "Run configuration file");
        add_format_flag(sub, window->format);
        CLI::Option* width = sub->add_option("--width", window->spec.width, "Window width");
        CLI::Option* stride =
            sub->add_option("--stride", window->spec.stride, "Window stride");
        sub->callback([&, window, width, stride] {
            window->width_set = width->count() > 0;
            window->stride_set = stride->count() > 0;
            exit_code = run_window(*window);
        });
    }

    auto stitch = std::make_shared<StitchOpts>();
    {
        CLI::App* sub = app.add_subcommand("stitch", "Reassemble windows into a sequence");
        sub->add_option("--index", stitch->index_path, "Window index JSON")->required();
        sub->add_option("--out", stitch->out, "Output motion file")->required();
        sub->add_option("--config", stitch->config_path, "Run configuration file");
        add_format_flag(sub, stitch->format);
        CLI::Option* policy =
            sub->add_option("--policy", stitch->policy, "Overlap policy")
                ->check(CLI::IsMember({"take_first", "take_last", "slerp_blend"}));
        sub->callback([&, stitch, policy] {
            stitch->policy_set = policy->count() > 0;
            exit_code = run_stitch(*stitch);
        });
    }

    auto train = std::make_shared<TrainOpts>();
    {
        CLI::App* sub = app.add_subcommand("vae-train", "Train a motion VAE");
        sub->add_option("--in", train->inputs, "Training motion files")
            ->required()
            ->expected(-1);
        sub->add_option("--model", train->model_out, "Output model file")->required();
        sub->add_option("--config", train->config_path, "Run configuration file");
        sub->add_option("--preset", train->preset,
                        "Size preset (overrides the config file)")
            ->check(CLI::IsMember({"desk", "full"}));
        sub->add_option("--history", train->history_out, "Per-epoch loss history JSON");
        sub->add_option("--window", train->window, "Training window, frames");
        sub->add_option("--latent", train->latent, "Latent dimension");
        sub->add_option("--hidden", train->hidden, "Recurrent hidden size");
        sub->add_option("--epochs", train->epochs, "Training epochs");
        sub->add_option("--batch", train->batch, "Batch size");
        sub->add_option("--lr", train->lr, "Learning rate");
        sub->add_option("--kl-weight", train->kl_weight, "KL term weight");
        CLI::Option* seed = sub->add_option("--seed", train->seed, "Random seed");
        sub->callback([&, train, seed] {
            train->seed_set = seed->count() > 0;
            exit_code = run_vae_train(*train);
        });
    }

    auto reconstruct = std::make_shared<ReconstructOpts>();
    {
        CLI::App* sub =
            app.add_subcommand("vae-reconstruct", "Reconstruct a sequence through a VAE");
        sub->add_option("--model", reconstruct->model_path, "Model file")->required();
        sub->add_option("--in", reconstruct->in, "Input motion file")->required();
        sub->add_option("--out", reconstruct->out, "Output motion file")->required();
        add_format_flag(sub, reconstruct->format);
        sub->callback([&, reconstruct] { exit_code = run_vae_reconstruct(*reconstruct); });
    }

    auto gradcheck = std::make_shared<GradCheckOpts>();
    {
        CLI::App* sub = app.add_subcommand(
            "vae-gradcheck", "Check analytic gradients against finite differences");
        sub->add_option("--models", gradcheck->models, "Number of random small models");
        sub->add_option("--tolerance", gradcheck->tolerance, "Relative error tolerance");
        sub->add_option("--seed", gradcheck->seed, "Random seed");
        sub->add_option("--out", gradcheck->out, "Report path (stdout by default)");
        sub->callback([&, gradcheck] { exit_code = run_vae_gradcheck(*gradcheck); });
    }

    auto skcheck = std::make_shared<SkeletonCheckOpts>();
    {
        CLI::App* sub = app.add_subcommand("skeleton-check", "Validate a skeleton file");
        sub->add_option("--skeleton", skcheck->skeleton_path,
                        "Skeleton file (builtin by default)");
        sub->add_option("--write", skcheck->write_path,
                        "Also write the validated skeleton to this path");
        sub->add_option("--out", skcheck->out, "Report path (stdout by default)");
        sub->callback([&, skcheck] { exit_code = run_skeleton_check(*skcheck); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}

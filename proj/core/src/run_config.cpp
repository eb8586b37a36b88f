#include "mvkit/run_config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "mvkit/error.hpp"

namespace mvkit {

void RunConfig::validate() const {
    augment.validate();
    vae.validate();
    window.validate();
    if (!(smooth_ratio >= 0.0 && smooth_ratio <= 1.0))
        throw DataError("config smooth.ratio must be in [0, 1]");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Entry {
    std::string section, key, value;
};

[[noreturn]] void bad_value(const Entry& e) {
    throw DataError("config value for " + e.section + "." + e.key + " is malformed: '" +
                    e.value + "'");
}

int parse_int(const Entry& e) {
    try {
        size_t pos = 0;
        const int v = std::stoi(e.value, &pos);
        if (pos != e.value.size()) bad_value(e);
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(e);
    }
}

uint64_t parse_u64(const Entry& e) {
    try {
        size_t pos = 0;
        const uint64_t v = std::stoull(e.value, &pos);
        if (pos != e.value.size()) bad_value(e);
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(e);
    }
}

double parse_real(const Entry& e) {
    try {
        size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) bad_value(e);
        return v;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(e);
    }
}

bool parse_bool(const Entry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    bad_value(e);
}

std::vector<double> parse_real_list(const Entry& e) {
    std::vector<double> out;
    std::istringstream in(e.value);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) bad_value(e);
        Entry sub{e.section, e.key, tok};
        out.push_back(parse_real(sub));
    }
    return out;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);

    std::vector<Entry> entries;
    std::string section, line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw DataError("config line " + std::to_string(line_no) +
                                ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw DataError("config line " + std::to_string(line_no) +
                            ": key before any [section]");
        entries.push_back({section, trim(t.substr(0, eq)), trim(t.substr(eq + 1))});
    }

    RunConfig cfg;
    // The vae preset must apply before any vae override, whatever the file
    // order.
    for (const auto& e : entries) {
        if (e.section == "vae" && e.key == "preset") {
            if (e.value == "desk") cfg.vae = VaeConfig{};
            else if (e.value == "full") cfg.vae = VaeConfig::full();
            else bad_value(e);
        }
    }

    for (const auto& e : entries) {
        if (e.section == "augment") {
            if (e.key == "speed_factors") cfg.augment.speed_factors = parse_real_list(e);
            else if (e.key == "enable_flip") cfg.augment.enable_flip = parse_bool(e);
            else if (e.key == "root_rotation_samples")
                cfg.augment.root_rotation_samples = parse_int(e);
            else if (e.key == "seed") cfg.augment.rng_seed = parse_u64(e);
            else throw DataError("config has unknown key augment." + e.key);
        } else if (e.section == "vae") {
            if (e.key == "preset") continue;
            else if (e.key == "window") cfg.vae.window = parse_int(e);
            else if (e.key == "input_dim") cfg.vae.input_dim = parse_int(e);
            else if (e.key == "latent_dim") cfg.vae.latent_dim = parse_int(e);
            else if (e.key == "encoder_hidden") cfg.vae.encoder_hidden = parse_int(e);
            else if (e.key == "decoder_hidden") cfg.vae.decoder_hidden = parse_int(e);
            else if (e.key == "mlp_hidden1") cfg.vae.mlp_hidden1 = parse_int(e);
            else if (e.key == "mlp_hidden2") cfg.vae.mlp_hidden2 = parse_int(e);
            else if (e.key == "kl_weight") cfg.vae.kl_weight = parse_real(e);
            else if (e.key == "learning_rate") cfg.vae.learning_rate = parse_real(e);
            else if (e.key == "epochs") cfg.vae.epochs = parse_int(e);
            else if (e.key == "batch_size") cfg.vae.batch_size = parse_int(e);
            else if (e.key == "seed") cfg.vae.rng_seed = parse_u64(e);
            else throw DataError("config has unknown key vae." + e.key);
        } else if (e.section == "window") {
            if (e.key == "width") cfg.window.width = parse_int(e);
            else if (e.key == "stride") cfg.window.stride = parse_int(e);
            else throw DataError("config has unknown key window." + e.key);
        } else if (e.section == "smooth") {
            if (e.key == "ratio") cfg.smooth_ratio = parse_real(e);
            else throw DataError("config has unknown key smooth." + e.key);
        } else if (e.section == "stitch") {
            if (e.key == "policy") cfg.stitch_policy = stitch_policy_from_string(e.value);
            else throw DataError("config has unknown key stitch." + e.key);
        } else if (e.section == "evaluate") {
            if (e.key == "per_frame") cfg.evaluate_per_frame = parse_bool(e);
            else throw DataError("config has unknown key evaluate." + e.key);
        } else {
            throw DataError("config has unknown section [" + e.section + "]");
        }
    }

    cfg.validate();
    return cfg;
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    cfg.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot open config file for writing: " + path);

    out << "[augment]\n";
    out << "speed_factors =";
    for (size_t i = 0; i < cfg.augment.speed_factors.size(); ++i)
        out << (i ? ", " : " ") << fmt_double(cfg.augment.speed_factors[i]);
    out << "\n";
    out << "enable_flip = " << (cfg.augment.enable_flip ? "true" : "false") << "\n";
    out << "root_rotation_samples = " << cfg.augment.root_rotation_samples << "\n";
    out << "seed = " << cfg.augment.rng_seed << "\n\n";

    out << "[vae]\n";
    out << "window = " << cfg.vae.window << "\n";
    out << "input_dim = " << cfg.vae.input_dim << "\n";
    out << "latent_dim = " << cfg.vae.latent_dim << "\n";
    out << "encoder_hidden = " << cfg.vae.encoder_hidden << "\n";
    out << "decoder_hidden = " << cfg.vae.decoder_hidden << "\n";
    out << "mlp_hidden1 = " << cfg.vae.mlp_hidden1 << "\n";
    out << "mlp_hidden2 = " << cfg.vae.mlp_hidden2 << "\n";
    out << "kl_weight = " << fmt_double(cfg.vae.kl_weight) << "\n";
    out << "learning_rate = " << fmt_double(cfg.vae.learning_rate) << "\n";
    out << "epochs = " << cfg.vae.epochs << "\n";
    out << "batch_size = " << cfg.vae.batch_size << "\n";
    out << "seed = " << cfg.vae.rng_seed << "\n\n";

    out << "[window]\n";
    out << "width = " << cfg.window.width << "\n";
    out << "stride = " << cfg.window.stride << "\n\n";

    out << "[smooth]\n";
    out << "ratio = " << fmt_double(cfg.smooth_ratio) << "\n\n";

    out << "[stitch]\n";
    out << "policy = " << to_string(cfg.stitch_policy) << "\n\n";

    out << "[evaluate]\n";
    out << "per_frame = " << (cfg.evaluate_per_frame ? "true" : "false") << "\n";
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace mvkit

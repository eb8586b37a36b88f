#include "mvkit/vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "mvkit/error.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/rotation.hpp"
#include "mvkit/smoothing.hpp"

namespace mvkit {

namespace {

constexpr double kLogSigmaClamp = 10.0;
constexpr double kGradClipNorm = 1.0;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Seed streams: training latent noise is derived per (epoch, element) so every
// pass resamples, shuffles per epoch. Gradient checks fix noise per element.
constexpr uint64_t kEpsStream = 0x657073ULL << 32;
constexpr uint64_t kShuffleStream = 0x73687566ULL << 32;

// Flat-vector tensor indices; must match build_layout order.
enum Tid : int {
    kEncFWr, kEncFUr, kEncFBr, kEncFWu, kEncFUu, kEncFBu, kEncFWc, kEncFUc, kEncFBc,
    kEncBWr, kEncBUr, kEncBBr, kEncBWu, kEncBUu, kEncBBu, kEncBWc, kEncBUc, kEncBBc,
    kEncW1, kEncB1, kEncW2, kEncB2, kEncWMu, kEncBMu, kEncWLs, kEncBLs,
    kDecWr, kDecUr, kDecBr, kDecWu, kDecUu, kDecBu, kDecWc, kDecUc, kDecBc,
    kDecV1, kDecC1, kDecV2, kDecC2,
    kDecTheta0,
    kTensorCount,
};

std::vector<TensorInfo> build_layout(const VaeConfig& c) {
    std::vector<TensorInfo> out;
    out.reserve(kTensorCount);
    std::ptrdiff_t offset = 0;
    auto add = [&](const char* name, int rows, int cols) {
        out.push_back({name, rows, cols, offset});
        offset += static_cast<std::ptrdiff_t>(rows) * cols;
    };
    auto add_gru = [&](const std::string& prefix, int hidden, int input) {
        add((prefix + "_wr").c_str(), hidden, input);
        add((prefix + "_ur").c_str(), hidden, hidden);
        add((prefix + "_br").c_str(), hidden, 1);
        add((prefix + "_wu").c_str(), hidden, input);
        add((prefix + "_uu").c_str(), hidden, hidden);
        add((prefix + "_bu").c_str(), hidden, 1);
        add((prefix + "_wc").c_str(), hidden, input);
        add((prefix + "_uc").c_str(), hidden, hidden);
        add((prefix + "_bc").c_str(), hidden, 1);
    };

    add_gru("enc_f", c.encoder_hidden, c.input_dim);
    add_gru("enc_b", c.encoder_hidden, c.input_dim);
    add("enc_w1", c.mlp_hidden1, 2 * c.encoder_hidden);
    add("enc_b1", c.mlp_hidden1, 1);
    add("enc_w2", c.mlp_hidden2, c.mlp_hidden1);
    add("enc_b2", c.mlp_hidden2, 1);
    add("enc_wmu", c.latent_dim, c.mlp_hidden2);
    add("enc_bmu", c.latent_dim, 1);
    add("enc_wls", c.latent_dim, c.mlp_hidden2);
    add("enc_bls", c.latent_dim, 1);
    add_gru("dec", c.decoder_hidden, c.input_dim + c.latent_dim);
    add("dec_v1", c.mlp_hidden2, c.decoder_hidden);
    add("dec_c1", c.mlp_hidden2, 1);
    add("dec_v2", c.input_dim, c.mlp_hidden2);
    add("dec_c2", c.input_dim, 1);
    add("dec_theta0", c.input_dim, 1);
    return out;
}

using CMat = Eigen::Map<const Eigen::MatrixXd>;
using MMat = Eigen::Map<Eigen::MatrixXd>;
using CVec = Eigen::Map<const Eigen::VectorXd>;
using MVec = Eigen::Map<Eigen::VectorXd>;

CMat cmat(const Eigen::VectorXd& flat, const TensorInfo& t) {
    return {flat.data() + t.offset, t.rows, t.cols};
}
MMat mmat(Eigen::VectorXd& flat, const TensorInfo& t) {
    return {flat.data() + t.offset, t.rows, t.cols};
}
CVec cvec(const Eigen::VectorXd& flat, const TensorInfo& t) {
    return {flat.data() + t.offset, t.rows};
}
MVec mvec(Eigen::VectorXd& flat, const TensorInfo& t) {
    return {flat.data() + t.offset, t.rows};
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& v) {
    return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

// ---------------------------------------------------------------------------
// Gated recurrent cell. Convention:
//   r = sigm(Wr x + Ur h + br), u = sigm(Wu x + Uu h + bu)
//   c = tanh(Wc x + Uc (r.h) + bc), h' = u.h + (1-u).c
// ---------------------------------------------------------------------------

struct GruC {
    CMat Wr, Ur, Wu, Uu, Wc, Uc;
    CVec br, bu, bc;
};

struct GruG {
    MMat Wr, Ur, Wu, Uu, Wc, Uc;
    MVec br, bu, bc;
};

GruC gru_c(const Eigen::VectorXd& flat, const std::vector<TensorInfo>& l, int base) {
    return {cmat(flat, l[base + 0]), cmat(flat, l[base + 1]), cmat(flat, l[base + 3]),
            cmat(flat, l[base + 4]), cmat(flat, l[base + 6]), cmat(flat, l[base + 7]),
            cvec(flat, l[base + 2]), cvec(flat, l[base + 5]), cvec(flat, l[base + 8])};
}

GruG gru_g(Eigen::VectorXd& flat, const std::vector<TensorInfo>& l, int base) {
    return {mmat(flat, l[base + 0]), mmat(flat, l[base + 1]), mmat(flat, l[base + 3]),
            mmat(flat, l[base + 4]), mmat(flat, l[base + 6]), mmat(flat, l[base + 7]),
            mvec(flat, l[base + 2]), mvec(flat, l[base + 5]), mvec(flat, l[base + 8])};
}

struct GruStep {
    Eigen::VectorXd r, u, c, rh, h;
};

GruStep gru_forward(const GruC& p, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev) {
    GruStep s;
    s.r = sigmoid(p.Wr * x + p.Ur * h_prev + p.br);
    s.u = sigmoid(p.Wu * x + p.Uu * h_prev + p.bu);
    s.rh = s.r.cwiseProduct(h_prev);
    s.c = (p.Wc * x + p.Uc * s.rh + p.bc).array().tanh().matrix();
    s.h = (s.u.array() * h_prev.array() + (1.0 - s.u.array()) * s.c.array()).matrix();
    return s;
}

// Accumulates parameter gradients, returns d h_prev; writes d x when asked.
Eigen::VectorXd gru_backward(const GruC& p, GruG& g, const GruStep& s,
                             const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                             const Eigen::VectorXd& dh, Eigen::VectorXd* dx) {
    const Eigen::VectorXd du = dh.cwiseProduct(h_prev - s.c);
    const Eigen::VectorXd dc = (dh.array() * (1.0 - s.u.array())).matrix();
    Eigen::VectorXd dh_prev = dh.cwiseProduct(s.u);

    const Eigen::VectorXd dac = (dc.array() * (1.0 - s.c.array().square())).matrix();
    g.Wc += dac * x.transpose();
    g.Uc += dac * s.rh.transpose();
    g.bc += dac;
    const Eigen::VectorXd drh = p.Uc.transpose() * dac;
    const Eigen::VectorXd dr = drh.cwiseProduct(h_prev);
    dh_prev += drh.cwiseProduct(s.r);

    const Eigen::VectorXd dar = (dr.array() * s.r.array() * (1.0 - s.r.array())).matrix();
    g.Wr += dar * x.transpose();
    g.Ur += dar * h_prev.transpose();
    g.br += dar;
    dh_prev += p.Ur.transpose() * dar;

    const Eigen::VectorXd dau = (du.array() * s.u.array() * (1.0 - s.u.array())).matrix();
    g.Wu += dau * x.transpose();
    g.Uu += dau * h_prev.transpose();
    g.bu += dau;
    dh_prev += p.Uu.transpose() * dau;

    if (dx) *dx = p.Wr.transpose() * dar + p.Wu.transpose() * dau + p.Wc.transpose() * dac;
    return dh_prev;
}

// ---------------------------------------------------------------------------
// Whole-window forward/backward with caches for reverse mode.
// ---------------------------------------------------------------------------

struct EncCache {
    std::vector<GruStep> f, b;
    Eigen::VectorXd pooled, m1, m2, mu, ls_pre, ls;
};

struct DecCache {
    std::vector<GruStep> steps;
    std::vector<Eigen::VectorXd> inputs;  // [theta_prev; z]
    std::vector<Eigen::VectorXd> o1;
    Eigen::MatrixXd y;  // W x D
};

struct FullCache {
    EncCache ec;
    DecCache dc;
    Eigen::VectorXd sigma, z;
    VaeLossParts loss;
};

void encoder_forward(const VaeConfig& cfg, const Eigen::VectorXd& flat,
                     const std::vector<TensorInfo>& l, const Eigen::MatrixXd& x,
                     EncCache& ec) {
    const int w = static_cast<int>(x.rows());
    const int he = cfg.encoder_hidden;
    const GruC pf = gru_c(flat, l, kEncFWr);
    const GruC pb = gru_c(flat, l, kEncBWr);
    const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(he);

    ec.f.resize(static_cast<size_t>(w));
    ec.b.resize(static_cast<size_t>(w));
    for (int t = 0; t < w; ++t)
        ec.f[static_cast<size_t>(t)] = gru_forward(
            pf, x.row(t).transpose(), t == 0 ? h0 : ec.f[static_cast<size_t>(t - 1)].h);
    for (int t = w - 1; t >= 0; --t)
        ec.b[static_cast<size_t>(t)] = gru_forward(
            pb, x.row(t).transpose(), t == w - 1 ? h0 : ec.b[static_cast<size_t>(t + 1)].h);

    ec.pooled = Eigen::VectorXd::Zero(2 * he);
    for (int t = 0; t < w; ++t) {
        ec.pooled.head(he) += ec.f[static_cast<size_t>(t)].h;
        ec.pooled.tail(he) += ec.b[static_cast<size_t>(t)].h;
    }
    ec.pooled /= static_cast<double>(w);

    ec.m1 = (cmat(flat, l[kEncW1]) * ec.pooled + cvec(flat, l[kEncB1]))
                .array().tanh().matrix();
    ec.m2 = (cmat(flat, l[kEncW2]) * ec.m1 + cvec(flat, l[kEncB2])).array().tanh().matrix();
    ec.mu = cmat(flat, l[kEncWMu]) * ec.m2 + cvec(flat, l[kEncBMu]);
    ec.ls_pre = cmat(flat, l[kEncWLs]) * ec.m2 + cvec(flat, l[kEncBLs]);
    ec.ls = ec.ls_pre.cwiseMax(-kLogSigmaClamp).cwiseMin(kLogSigmaClamp);
}

void decoder_forward(const VaeConfig& cfg, const Eigen::VectorXd& flat,
                     const std::vector<TensorInfo>& l, const Eigen::VectorXd& z, int w,
                     DecCache& dc) {
    const int d = cfg.input_dim;
    const GruC pd = gru_c(flat, l, kDecWr);
    const CMat v1 = cmat(flat, l[kDecV1]);
    const CVec c1 = cvec(flat, l[kDecC1]);
    const CMat v2 = cmat(flat, l[kDecV2]);
    const CVec c2 = cvec(flat, l[kDecC2]);

    dc.steps.resize(static_cast<size_t>(w));
    dc.inputs.resize(static_cast<size_t>(w));
    dc.o1.resize(static_cast<size_t>(w));
    dc.y.resize(w, d);

    Eigen::VectorXd theta_prev = cvec(flat, l[kDecTheta0]);
    Eigen::VectorXd g_prev = Eigen::VectorXd::Zero(cfg.decoder_hidden);
    for (int t = 0; t < w; ++t) {
        auto& input = dc.inputs[static_cast<size_t>(t)];
        input.resize(d + cfg.latent_dim);
        input.head(d) = theta_prev;
        input.tail(cfg.latent_dim) = z;
        dc.steps[static_cast<size_t>(t)] = gru_forward(pd, input, g_prev);
        g_prev = dc.steps[static_cast<size_t>(t)].h;
        dc.o1[static_cast<size_t>(t)] = (v1 * g_prev + c1).array().tanh().matrix();
        dc.y.row(t) = (v2 * dc.o1[static_cast<size_t>(t)] + c2).transpose();
        theta_prev = dc.y.row(t).transpose();
    }
}

VaeLossParts loss_from_parts(const Eigen::MatrixXd& recon, const Eigen::MatrixXd& target,
                             const Eigen::VectorXd& mu, const Eigen::VectorXd& ls,
                             double kl_weight) {
    VaeLossParts p;
    const auto entries = static_cast<double>(recon.rows() * recon.cols());
    p.recon_term = (recon - target).squaredNorm() / entries;
    const auto s_z = static_cast<double>(mu.size());
    p.kl_term = (mu.squaredNorm() + ls.array().exp().square().sum() - s_z -
                 2.0 * ls.sum()) /
                (2.0 * s_z);
    p.total = p.recon_term + kl_weight * p.kl_term;
    return p;
}

// Encoder -> reparameterize with the given noise -> decoder -> loss.
void forward_window(const VaeConfig& cfg, const Eigen::VectorXd& flat,
                    const std::vector<TensorInfo>& l, const Eigen::MatrixXd& x,
                    const Eigen::VectorXd& eps, FullCache& fc) {
    encoder_forward(cfg, flat, l, x, fc.ec);
    fc.sigma = fc.ec.ls.array().exp().matrix();
    fc.z = fc.ec.mu + fc.sigma.cwiseProduct(eps);
    decoder_forward(cfg, flat, l, fc.z, static_cast<int>(x.rows()), fc.dc);
    fc.loss = loss_from_parts(fc.dc.y, x, fc.ec.mu, fc.ec.ls, cfg.kl_weight);
}

// Reverse pass of forward_window; adds scale * d(total)/d(params) to grad.
void backward_window(const VaeConfig& cfg, const Eigen::VectorXd& flat,
                     const std::vector<TensorInfo>& l, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& eps, const FullCache& fc,
                     Eigen::VectorXd& grad, double scale) {
    const int w = static_cast<int>(x.rows());
    const int d = cfg.input_dim;
    const int he = cfg.encoder_hidden;
    const int sz = cfg.latent_dim;
    const double entries = static_cast<double>(w) * d;

    // Decoder: walk the rollout backwards, carrying gradients through both
    // the recurrent state and the pose feedback edge.
    const GruC pd = gru_c(flat, l, kDecWr);
    GruG gd = gru_g(grad, l, kDecWr);
    const CMat v1 = cmat(flat, l[kDecV1]);
    const CMat v2 = cmat(flat, l[kDecV2]);
    MMat gv1 = mmat(grad, l[kDecV1]);
    MVec gc1 = mvec(grad, l[kDecC1]);
    MMat gv2 = mmat(grad, l[kDecV2]);
    MVec gc2 = mvec(grad, l[kDecC2]);

    const Eigen::VectorXd g0 = Eigen::VectorXd::Zero(cfg.decoder_hidden);
    Eigen::VectorXd carry_dtheta = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd carry_dg = g0;
    Eigen::VectorXd dz_acc = Eigen::VectorXd::Zero(sz);
    Eigen::VectorXd dx_in;
    for (int t = w - 1; t >= 0; --t) {
        const auto& step = fc.dc.steps[static_cast<size_t>(t)];
        const auto& o1 = fc.dc.o1[static_cast<size_t>(t)];
        const Eigen::VectorXd dy =
            scale * (2.0 / entries) * (fc.dc.y.row(t) - x.row(t)).transpose() +
            carry_dtheta;

        gv2 += dy * o1.transpose();
        gc2 += dy;
        const Eigen::VectorXd da1 =
            ((v2.transpose() * dy).array() * (1.0 - o1.array().square())).matrix();
        gv1 += da1 * step.h.transpose();
        gc1 += da1;

        const Eigen::VectorXd dg = v1.transpose() * da1 + carry_dg;
        const Eigen::VectorXd& h_prev =
            t == 0 ? g0 : fc.dc.steps[static_cast<size_t>(t - 1)].h;
        carry_dg = gru_backward(pd, gd, step, fc.dc.inputs[static_cast<size_t>(t)], h_prev,
                                dg, &dx_in);
        carry_dtheta = dx_in.head(d);
        dz_acc += dx_in.tail(sz);
    }
    mvec(grad, l[kDecTheta0]) += carry_dtheta;

    // Latent heads: reparameterization plus the KL penalty.
    Eigen::VectorXd dmu =
        dz_acc + scale * (cfg.kl_weight / static_cast<double>(sz)) * fc.ec.mu;
    Eigen::VectorXd dls =
        dz_acc.cwiseProduct(fc.sigma.cwiseProduct(eps)) +
        scale * (cfg.kl_weight / static_cast<double>(sz)) *
            (fc.sigma.array().square() - 1.0).matrix();
    for (int j = 0; j < sz; ++j)
        if (std::abs(fc.ec.ls_pre(j)) >= kLogSigmaClamp) dls(j) = 0.0;

    mmat(grad, l[kEncWMu]) += dmu * fc.ec.m2.transpose();
    mvec(grad, l[kEncBMu]) += dmu;
    mmat(grad, l[kEncWLs]) += dls * fc.ec.m2.transpose();
    mvec(grad, l[kEncBLs]) += dls;

    const Eigen::VectorXd dm2 =
        cmat(flat, l[kEncWMu]).transpose() * dmu + cmat(flat, l[kEncWLs]).transpose() * dls;
    const Eigen::VectorXd da2 = (dm2.array() * (1.0 - fc.ec.m2.array().square())).matrix();
    mmat(grad, l[kEncW2]) += da2 * fc.ec.m1.transpose();
    mvec(grad, l[kEncB2]) += da2;

    const Eigen::VectorXd dm1 = cmat(flat, l[kEncW2]).transpose() * da2;
    const Eigen::VectorXd da1 = (dm1.array() * (1.0 - fc.ec.m1.array().square())).matrix();
    mmat(grad, l[kEncW1]) += da1 * fc.ec.pooled.transpose();
    mvec(grad, l[kEncB1]) += da1;

    const Eigen::VectorXd dpool =
        cmat(flat, l[kEncW1]).transpose() * da1 / static_cast<double>(w);

    // Bidirectional recurrences: gradient flows opposite each direction's
    // state flow.
    const GruC pf = gru_c(flat, l, kEncFWr);
    GruG gf = gru_g(grad, l, kEncFWr);
    const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(he);
    Eigen::VectorXd carry = h0;
    for (int t = w - 1; t >= 0; --t) {
        const Eigen::VectorXd dh = dpool.head(he) + carry;
        carry = gru_backward(pf, gf, fc.ec.f[static_cast<size_t>(t)], x.row(t).transpose(),
                             t == 0 ? h0 : fc.ec.f[static_cast<size_t>(t - 1)].h, dh,
                             nullptr);
    }

    const GruC pb = gru_c(flat, l, kEncBWr);
    GruG gb = gru_g(grad, l, kEncBWr);
    carry = h0;
    for (int t = 0; t < w; ++t) {
        const Eigen::VectorXd dh = dpool.tail(he) + carry;
        carry = gru_backward(pb, gb, fc.ec.b[static_cast<size_t>(t)], x.row(t).transpose(),
                             t == w - 1 ? h0 : fc.ec.b[static_cast<size_t>(t + 1)].h, dh,
                             nullptr);
    }
}

void check_window_shape(const VaeConfig& cfg, const Eigen::MatrixXd& x, size_t index) {
    if (x.rows() != cfg.window || x.cols() != cfg.input_dim)
        throw DataError("window " + std::to_string(index) + " is " +
                        std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                        ", model expects " + std::to_string(cfg.window) + "x" +
                        std::to_string(cfg.input_dim));
    if (!x.allFinite())
        throw DataError("window " + std::to_string(index) + " has non-finite entries");
}

Eigen::VectorXd element_noise(const VaeConfig& cfg, size_t index) {
    Rng rng(derive_seed(cfg.rng_seed, kEpsStream + index));
    return rng.normal_vector(cfg.latent_dim);
}

}  // namespace

VaeConfig VaeConfig::full() {
    VaeConfig c;
    c.latent_dim = 512;
    c.encoder_hidden = 512;
    c.decoder_hidden = 512;
    c.mlp_hidden1 = 1024;
    c.mlp_hidden2 = 512;
    return c;
}

void VaeConfig::validate() const {
    auto dim = [](int v, const char* name) {
        if (v < 1)
            throw DataError(std::string("vae config ") + name + " must be >= 1, got " +
                            std::to_string(v));
    };
    dim(input_dim, "input_dim");
    dim(latent_dim, "latent_dim");
    dim(encoder_hidden, "encoder_hidden");
    dim(decoder_hidden, "decoder_hidden");
    dim(mlp_hidden1, "mlp_hidden1");
    dim(mlp_hidden2, "mlp_hidden2");
    dim(batch_size, "batch_size");
    if (window < 2)
        throw DataError("vae config window must be >= 2, got " + std::to_string(window));
    if (!(kl_weight >= 0.0) || !std::isfinite(kl_weight))
        throw DataError("vae config kl_weight must be >= 0 and finite");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw DataError("vae config learning_rate must be >= 0 and finite");
    if (epochs < 0)
        throw DataError("vae config epochs must be >= 0, got " + std::to_string(epochs));
}

VaeModel VaeModel::init(const VaeConfig& config, uint64_t seed) {
    config.validate();
    VaeModel m;
    m.config_ = config;
    m.layout_ = build_layout(config);
    const auto& last = m.layout_.back();
    m.params_ = Eigen::VectorXd::Zero(last.offset +
                                      static_cast<std::ptrdiff_t>(last.rows) * last.cols);

    Rng rng(seed);
    for (const auto& t : m.layout_) {
        if (t.cols == 1) continue;  // biases and the pose token start at zero
        const double bound = 1.0 / std::sqrt(static_cast<double>(t.cols));
        MMat w = mmat(m.params_, t);
        for (int c = 0; c < t.cols; ++c)
            for (int r = 0; r < t.rows; ++r) w(r, c) = rng.uniform(-bound, bound);
    }
    return m;
}

Eigen::Map<Eigen::MatrixXd> VaeModel::tensor(std::string_view name) {
    for (const auto& t : layout_)
        if (t.name == name) return mmat(params_, t);
    throw DataError("unknown model tensor: " + std::string(name));
}

Eigen::Map<const Eigen::MatrixXd> VaeModel::tensor(std::string_view name) const {
    for (const auto& t : layout_)
        if (t.name == name) return cmat(params_, t);
    throw DataError("unknown model tensor: " + std::string(name));
}

LatentCode encode(const VaeModel& model, const Eigen::MatrixXd& window) {
    check_window_shape(model.config(), window, 0);
    EncCache ec;
    encoder_forward(model.config(), model.params(), model.layout(), window, ec);
    LatentCode code;
    code.mu = ec.mu;
    code.log_sigma = ec.ls;
    return code;
}

Eigen::VectorXd reparameterize(const LatentCode& code, uint64_t rng_seed) {
    if (code.mu.size() != code.log_sigma.size())
        throw DataError("latent code mu and log_sigma sizes differ");
    Rng rng(rng_seed);
    const Eigen::VectorXd eps = rng.normal_vector(static_cast<int>(code.mu.size()));
    return code.mu + code.log_sigma.array().exp().matrix().cwiseProduct(eps);
}

Eigen::MatrixXd decode(const VaeModel& model, const Eigen::VectorXd& z, int window) {
    if (z.size() != model.config().latent_dim)
        throw DataError("latent vector has " + std::to_string(z.size()) +
                        " dims, model expects " + std::to_string(model.config().latent_dim));
    if (window < 1) throw DataError("decode window must be >= 1");
    DecCache dc;
    decoder_forward(model.config(), model.params(), model.layout(), z, window, dc);
    return dc.y;
}

VaeLossParts vae_loss(const Eigen::MatrixXd& recon, const Eigen::MatrixXd& target,
                      const LatentCode& code, double kl_weight) {
    if (recon.rows() != target.rows() || recon.cols() != target.cols())
        throw DataError("reconstruction is " + std::to_string(recon.rows()) + "x" +
                        std::to_string(recon.cols()) + ", target is " +
                        std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
    if (code.mu.size() != code.log_sigma.size())
        throw DataError("latent code mu and log_sigma sizes differ");
    return loss_from_parts(recon, target, code.mu, code.log_sigma, kl_weight);
}

TrainResult train(VaeModel& model, const std::vector<Eigen::MatrixXd>& dataset) {
    const VaeConfig& cfg = model.config();
    cfg.validate();
    if (dataset.empty()) throw DataError("training dataset is empty");
    for (size_t i = 0; i < dataset.size(); ++i) check_window_shape(cfg, dataset[i], i);

    const size_t n = dataset.size();
    std::vector<Eigen::VectorXd> noise(n);

    const auto p = model.params().size();
    Eigen::VectorXd grad(p), m = Eigen::VectorXd::Zero(p), v = Eigen::VectorXd::Zero(p);
    int64_t adam_t = 0;

    TrainResult result;
    result.history.reserve(static_cast<size_t>(cfg.epochs));
    std::vector<size_t> order(n);
    const Eigen::VectorXd zero_eps = Eigen::VectorXd::Zero(cfg.latent_dim);
    FullCache fc;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = 0; i < n; ++i) {
            noise[i] = element_noise(cfg, static_cast<uint64_t>(epoch) * n + i);
            order[i] = i;
        }
        Rng shuffle_rng(derive_seed(cfg.rng_seed, kShuffleStream + static_cast<uint64_t>(epoch)));
        for (size_t i = n; i > 1; --i)
            std::swap(order[i - 1],
                      order[static_cast<size_t>(
                          shuffle_rng.uniform_int(0, static_cast<int>(i) - 1))]);

        for (size_t start = 0; start < n; start += static_cast<size_t>(cfg.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(cfg.batch_size));
            const double inv_b = 1.0 / static_cast<double>(stop - start);
            grad.setZero();
            double batch_total = 0.0;
            for (size_t k = start; k < stop; ++k) {
                const size_t i = order[k];
                forward_window(cfg, model.params(), model.layout(), dataset[i], noise[i], fc);
                batch_total += fc.loss.total;
                backward_window(cfg, model.params(), model.layout(), dataset[i], noise[i],
                                fc, grad, inv_b);
            }
            if (!std::isfinite(batch_total))
                throw NumericError("training diverged at optimizer step " +
                                   std::to_string(model.training_steps + 1) + " (epoch " +
                                   std::to_string(epoch) + ")");

            const double norm = grad.norm();
            if (norm > kGradClipNorm) grad *= kGradClipNorm / norm;

            ++adam_t;
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
            const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_t));
            model.params() -=
                (cfg.learning_rate / bc1) *
                (m.array() / ((v.array() / bc2).sqrt() + kAdamEps)).matrix();
            ++model.training_steps;
        }

        // The history entry is a sampling-free evaluation (z = mean) of the
        // post-epoch parameters, so it is unaffected by shuffling or noise.
        EpochLoss e;
        for (size_t i = 0; i < n; ++i) {
            forward_window(cfg, model.params(), model.layout(), dataset[i], zero_eps, fc);
            e.total += fc.loss.total;
            e.recon_term += fc.loss.recon_term;
            e.kl_term += fc.loss.kl_term;
        }
        e.total /= static_cast<double>(n);
        e.recon_term /= static_cast<double>(n);
        e.kl_term /= static_cast<double>(n);
        result.history.push_back(e);
    }
    return result;
}

GradCheckReport gradient_check(const VaeModel& model,
                               const std::vector<Eigen::MatrixXd>& batch, double fd_step) {
    if (batch.empty()) throw DataError("gradient check batch is empty");
    if (!(fd_step > 0.0)) throw DataError("gradient check step must be positive");
    VaeModel work = model;
    const VaeConfig& cfg = work.config();
    for (size_t i = 0; i < batch.size(); ++i) check_window_shape(cfg, batch[i], i);

    const size_t b = batch.size();
    std::vector<Eigen::VectorXd> noise(b);
    for (size_t i = 0; i < b; ++i) noise[i] = element_noise(cfg, i);

    const double inv_b = 1.0 / static_cast<double>(b);
    Eigen::VectorXd analytic = Eigen::VectorXd::Zero(work.params().size());
    FullCache fc;
    for (size_t i = 0; i < b; ++i) {
        forward_window(cfg, work.params(), work.layout(), batch[i], noise[i], fc);
        backward_window(cfg, work.params(), work.layout(), batch[i], noise[i], fc, analytic,
                        inv_b);
    }

    auto batch_loss = [&]() {
        double total = 0.0;
        for (size_t i = 0; i < b; ++i) {
            forward_window(cfg, work.params(), work.layout(), batch[i], noise[i], fc);
            total += fc.loss.total;
        }
        return total * inv_b;
    };

    GradCheckReport report;
    report.parameter_count = static_cast<int>(work.params().size());
    for (Eigen::Index i = 0; i < work.params().size(); ++i) {
        const double saved = work.params()(i);
        work.params()(i) = saved + fd_step;
        const double up = batch_loss();
        work.params()(i) = saved - fd_step;
        const double down = batch_loss();
        work.params()(i) = saved;

        const double numeric = (up - down) / (2.0 * fd_step);
        const double a = analytic(i);
        const double rel =
            std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-5);
        if (rel > report.max_rel_error) {
            size_t ti = 0;
            while (ti + 1 < work.layout().size() && work.layout()[ti + 1].offset <= i) ++ti;
            report.max_rel_error = rel;
            report.worst_tensor = work.layout()[ti].name;
            report.worst_index = static_cast<int>(i - work.layout()[ti].offset);
            report.worst_analytic = a;
            report.worst_numeric = numeric;
        }
    }
    return report;
}

Eigen::MatrixXd sixd_encode_sequence(const MotionSequence& seq) {
    validate_sequence(seq);
    const int joints = seq.joint_count();
    Eigen::MatrixXd out(seq.frame_count(), 6 * joints);
    for (int t = 0; t < seq.frame_count(); ++t)
        for (int j = 0; j < joints; ++j)
            out.block<1, 6>(t, 6 * j) =
                sixd_encode(matrix_from_quaternion(quaternion_from_axis_angle(
                                seq.frames[static_cast<size_t>(t)]
                                    .rotations[static_cast<size_t>(j)])))
                    .transpose();
    return out;
}

MotionSequence sixd_decode_sequence(const Eigen::MatrixXd& rows, double fps,
                                    const std::string& name) {
    if (rows.cols() % 6 != 0)
        throw DataError("pose row width " + std::to_string(rows.cols()) +
                        " is not a multiple of 6");
    const auto joints = static_cast<int>(rows.cols() / 6);
    MotionSequence seq;
    seq.fps = fps;
    seq.name = name;
    seq.frames.reserve(static_cast<size_t>(rows.rows()));
    for (int t = 0; t < rows.rows(); ++t) {
        PoseFrame f;
        f.rotations.reserve(static_cast<size_t>(joints));
        for (int j = 0; j < joints; ++j)
            f.rotations.push_back(axis_angle_from_quaternion(
                quaternion_from_matrix(sixd_decode(rows.block<1, 6>(t, 6 * j).transpose()))));
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

std::vector<Eigen::MatrixXd> build_training_windows(const std::vector<MotionSequence>& seqs,
                                                    int window) {
    WindowSpec spec;
    spec.width = window;
    spec.stride = window;
    std::vector<Eigen::MatrixXd> out;
    for (const auto& seq : seqs) {
        const WindowSet set = sliding_windows(seq, spec);
        for (const auto& w : set.windows) out.push_back(sixd_encode_sequence(w));
    }
    return out;
}

MotionSequence reconstruct_sequence(const VaeModel& model, const MotionSequence& seq) {
    const VaeConfig& cfg = model.config();
    validate_sequence(seq, 2);
    if (6 * seq.joint_count() != cfg.input_dim)
        throw DataError("sequence has " + std::to_string(seq.joint_count()) +
                        " joints; model input dim " + std::to_string(cfg.input_dim) +
                        " expects " + std::to_string(cfg.input_dim / 6));

    WindowSpec spec;
    spec.width = cfg.window;
    spec.stride = cfg.window;
    WindowSet set = sliding_windows(seq, spec);

    for (auto& w : set.windows) {
        const Eigen::MatrixXd x = sixd_encode_sequence(w);
        const LatentCode code = encode(model, x);
        const Eigen::MatrixXd y = decode(model, code.mu, cfg.window);
        const MotionSequence decoded = sixd_decode_sequence(y, w.fps, w.name);
        for (size_t t = 0; t < w.frames.size(); ++t)
            w.frames[t].rotations = decoded.frames[t].rotations;
    }
    return stitch_windows(set.windows, set.map, StitchPolicy::TakeFirst);
}

// ---------------------------------------------------------------------------
// Model file: magic "MVKM", u16 version, u32-length textual config manifest,
// then shape-prefixed named f64 tensors.
// ---------------------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'M', 'V', 'K', 'M'};
constexpr uint16_t kModelVersion = 1;

std::string config_manifest(const VaeConfig& c, int64_t steps) {
    char buf[700];
    std::snprintf(buf, sizeof(buf),
                  "window=%d\ninput_dim=%d\nlatent_dim=%d\nencoder_hidden=%d\n"
                  "decoder_hidden=%d\nmlp_hidden1=%d\nmlp_hidden2=%d\n"
                  "kl_weight=%.17g\nlearning_rate=%.17g\nepochs=%d\nbatch_size=%d\n"
                  "rng_seed=%llu\ntraining_steps=%lld\n",
                  c.window, c.input_dim, c.latent_dim, c.encoder_hidden, c.decoder_hidden,
                  c.mlp_hidden1, c.mlp_hidden2, c.kl_weight, c.learning_rate, c.epochs,
                  c.batch_size, static_cast<unsigned long long>(c.rng_seed),
                  static_cast<long long>(steps));
    return buf;
}

void parse_manifest(const std::string& text, VaeConfig& c, int64_t& steps) {
    std::istringstream in(text);
    std::string line;
    std::map<std::string, bool> seen;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("model manifest line has no '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (seen[key]) throw DataError("model manifest key appears twice: " + key);
        seen[key] = true;
        try {
            if (key == "window") c.window = std::stoi(val);
            else if (key == "input_dim") c.input_dim = std::stoi(val);
            else if (key == "latent_dim") c.latent_dim = std::stoi(val);
            else if (key == "encoder_hidden") c.encoder_hidden = std::stoi(val);
            else if (key == "decoder_hidden") c.decoder_hidden = std::stoi(val);
            else if (key == "mlp_hidden1") c.mlp_hidden1 = std::stoi(val);
            else if (key == "mlp_hidden2") c.mlp_hidden2 = std::stoi(val);
            else if (key == "kl_weight") c.kl_weight = std::stod(val);
            else if (key == "learning_rate") c.learning_rate = std::stod(val);
            else if (key == "epochs") c.epochs = std::stoi(val);
            else if (key == "batch_size") c.batch_size = std::stoi(val);
            else if (key == "rng_seed") c.rng_seed = std::stoull(val);
            else if (key == "training_steps") steps = std::stoll(val);
            else throw DataError("model manifest has unknown key: " + key);
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("model manifest value for '" + key + "' is malformed: " + val);
        }
    }
    const char* required[] = {"window",         "input_dim",   "latent_dim",
                              "encoder_hidden", "decoder_hidden", "mlp_hidden1",
                              "mlp_hidden2",    "kl_weight",   "learning_rate",
                              "epochs",         "batch_size",  "rng_seed",
                              "training_steps"};
    for (const char* key : required)
        if (!seen[key]) throw DataError(std::string("model manifest is missing key: ") + key);
}

}  // namespace

void save_model(const std::string& path, const VaeModel& model) {
    detail::BinaryWriter out(path);
    out.raw(kModelMagic, sizeof(kModelMagic));
    out.u16(kModelVersion);
    const std::string manifest = config_manifest(model.config(), model.training_steps);
    out.u32(static_cast<uint32_t>(manifest.size()));
    out.bytes(manifest);
    out.u32(static_cast<uint32_t>(model.layout().size()));
    for (const auto& t : model.layout()) {
        out.u16(static_cast<uint16_t>(t.name.size()));
        out.bytes(t.name);
        out.i32(t.rows);
        out.i32(t.cols);
        out.raw(model.params().data() + t.offset,
                sizeof(double) * static_cast<size_t>(t.rows) * static_cast<size_t>(t.cols));
    }
}

VaeModel load_model(const std::string& path) {
    detail::BinaryReader in(path);
    char magic[4];
    in.raw(magic, sizeof(magic));
    if (std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
        throw DataError("not a model file (bad magic): " + path);
    const uint16_t version = in.u16();
    if (version != kModelVersion)
        throw DataError("unsupported model file version " + std::to_string(version) + ": " +
                        path);

    VaeConfig cfg;
    int64_t steps = 0;
    parse_manifest(in.bytes(in.u32()), cfg, steps);
    cfg.validate();

    VaeModel model;
    model.config_ = cfg;
    model.layout_ = build_layout(cfg);
    const auto& last = model.layout_.back();
    model.params_.resize(last.offset + static_cast<std::ptrdiff_t>(last.rows) * last.cols);
    model.training_steps = steps;

    const uint32_t count = in.u32();
    if (count != model.layout_.size())
        throw DataError("model file lists " + std::to_string(count) + " tensors, expected " +
                        std::to_string(model.layout_.size()) + ": " + path);
    for (const auto& t : model.layout_) {
        const std::string name = in.bytes(in.u16());
        const int32_t rows = in.i32();
        const int32_t cols = in.i32();
        if (name != t.name || rows != t.rows || cols != t.cols)
            throw DataError("model tensor mismatch: file has " + name + " " +
                            std::to_string(rows) + "x" + std::to_string(cols) +
                            ", expected " + t.name + " " + std::to_string(t.rows) + "x" +
                            std::to_string(t.cols) + ": " + path);
        in.raw(model.params_.data() + t.offset,
               sizeof(double) * static_cast<size_t>(t.rows) * static_cast<size_t>(t.cols));
    }
    if (!in.at_eof()) throw DataError("trailing bytes after model payload: " + path);
    return model;
}

}  // namespace mvkit

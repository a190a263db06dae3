#pragma once

#include <vector>

#include "flowgate/core/image.hpp"

namespace flowgate {

enum class Normalization : std::uint8_t {
    MeanOverValid, // sums divided by the number of contributing entries
    Sum,           // raw sums, for algebraic identities in tests
};

struct SsimWindow {
    int size = 11;
    double sigma = 1.5;

    bool operator==(const SsimWindow&) const = default;
};

struct LossConfig {
    double alpha = 0.9;
    double beta = 10.0;
    double lambda_smt = 0.1;
    double lambda_prc = 0.05;
    double lambda_sty = 120.0;
    double lambda_var = 0.1;
    double lambda_seg = 5.0;
    SsimWindow ssim_window{};
    Normalization norm = Normalization::MeanOverValid;

    void validate() const;
    bool operator==(const LossConfig&) const = default;
};

struct SsimResult {
    double mean = 1.0;
    Image map; // one value per valid window centre and channel
};

/// Gaussian-windowed SSIM with L = 1, C1 = 0.01^2, C2 = 0.03^2, valid
/// centres only. Images smaller than the window use the largest odd window
/// that fits.
SsimResult ssim(const Image& x, const Image& y, const SsimWindow& window = {});

/// alpha * (1 - SSIM(p*m, t*m)) / 2 + (1 - alpha) * |(p - t) * m|_1.
double masked_pixel_loss(const Image& pred, const Image& target, const OcclusionMap& mask, double alpha,
                         Normalization norm = Normalization::MeanOverValid, const SsimWindow& window = {});

/// Edge-aware first-order flow smoothness, forward differences with a zero
/// trailing border, weighted by exp(-channel-mean |dI|) per direction.
double smoothness_loss(const FlowField& flow, const Image& image, Normalization norm = Normalization::MeanOverValid);

/// Isotropic TV: sqrt(sum_c dx^2 + sum_c dy^2) at every grid position, the
/// trailing differences being 0. MeanOverValid divides by H*W.
double total_variation(const Image& x, Normalization norm = Normalization::MeanOverValid);

/// One caller-supplied feature map per abstraction level.
using FeatureStack = std::vector<Image>;

/// (1/n) sum_n [ |dpsi*m|_1 + beta |dpsi*(1-m)|_1 ], mask resized by nearest
/// neighbour to each level.
double perceptual_loss(const FeatureStack& fp, const FeatureStack& ft, const OcclusionMap& mask, double beta);

/// Gram matrix of the feature difference over mask-selected positions,
/// sum |G_ij| / (D^2 * count), plus beta times the same over the complement.
double style_loss(const FeatureStack& fp, const FeatureStack& ft, const OcclusionMap& mask, double beta);

struct LabelMap {
    int height = 0;
    int width = 0;
    int num_classes = 0;
    std::vector<int> labels; // row-major, may be empty when only probabilities are given
    Image probs;             // H x W x K, may be empty for hard labels

    static LabelMap from_labels(int h, int w, int k, std::vector<int> labels);
    static LabelMap from_probs(Image probs);
    void validate() const;
};

/// CE over mask-1 pixels plus beta * CE over mask-0 pixels, each averaged
/// over its own pixels; log clamped at 1e-12.
double masked_cross_entropy(const LabelMap& pred, const LabelMap& target, const OcclusionMap& mask, double beta);

/// L_p + lambda_smt * L_smt.
double flow_objective(const Image& pred_frame, const Image& target_frame, const OcclusionMap& mask,
                      const FlowField& flow, const Image& target_img, const LossConfig& cfg);

struct InpaintTerms {
    double pix = 0.0;
    double prc = 0.0;
    double sty = 0.0;
    double var = 0.0;
    double seg = 0.0;
};

/// pix + lambda_prc prc + lambda_sty sty + lambda_var var + lambda_seg seg.
double inpaint_objective(const InpaintTerms& terms, const LossConfig& cfg);

/// masked_pixel_loss over m plus beta times the same over 1 - m.
double pixel_reconstruction_loss(const Image& pred, const Image& target, const OcclusionMap& mask,
                                 const LossConfig& cfg);

// ---------------------------------------------------------------------------
// Differentiable terms. Absolute values are replaced by the Charbonnier
// penalty rho(d) = sqrt(d^2 + eps^2) - eps; results are divided by H*W.

inline constexpr double kCharbonnierEps = 1e-3;

enum class DiffTerm : std::uint8_t {
    CharbonnierPhoto, // d/dflow of mean rho(warp(src; f) - dst), single channel, clamped border
    Smoothness,       // d/dflow of mean weighted rho(du) + rho(dv)
    TotalVariation,   // d/dimage of mean sqrt(|dx|^2 + |dy|^2 + eps^2) - eps
};

struct DiffInputs {
    const Image* src = nullptr;      // CharbonnierPhoto: image being warped
    const Image* dst = nullptr;      // CharbonnierPhoto: target; Smoothness: edge image
    const FlowField* flow = nullptr; // Backward-tagged for CharbonnierPhoto
    const Image* image = nullptr;    // TotalVariation
    double eps = kCharbonnierEps;
};

struct DiffResult {
    double value = 0.0;
    std::vector<double> grad; // interleaved (u,v) for flow terms, image layout for TV
};

DiffResult loss_gradient(DiffTerm term, const DiffInputs& in);

double charbonnier_photometric(const Image& src, const Image& dst, const FlowField& flow, double eps,
                               std::vector<double>* grad);
double charbonnier_smoothness(const FlowField& flow, const Image& image, double eps, std::vector<double>* grad);

/// exp(-channel-mean |dI|) per grid position: [2i] toward (y, x+1), [2i+1]
/// toward (y+1, x); 0 where the neighbour does not exist.
std::vector<double> smoothness_edge_weights(const Image& image);
/// charbonnier_smoothness with precomputed edge weights.
double charbonnier_smoothness_weighted(const FlowField& flow, const std::vector<double>& weights, double eps,
                                       std::vector<double>* grad);
double charbonnier_tv(const Image& x, double eps, std::vector<double>* grad);

} // namespace flowgate

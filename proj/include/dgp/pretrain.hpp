#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dgp/encoder.hpp"
#include "dgp/nn.hpp"

namespace dgp {

struct Augmentation {
    enum class Kind { NodeDrop, EdgePerturb, AttrMask, SubgraphSample };
    Kind kind = Kind::NodeDrop;
    // Drop/perturb/mask probability, or the kept-node ratio for SubgraphSample.
    double p = 0.1;

    static Augmentation parse(const std::string& text);  // e.g. "node_drop:0.1"
    std::string str() const;
};

Graph augment(const Graph& g, const Augmentation& aug, Rng& rng);

// Copy of enc where every tensor t gets N(0, (eta * std(t))^2) noise.
GinEncoder perturb_params(const GinEncoder& enc, double eta, Rng& rng);

// NT-Xent over 2B L2-normalised embeddings; the positive of row i is its
// counterpart in the other view, all other 2B-2 rows are negatives.
ad::Var ntxent_loss(const ad::Var& z1, const ad::Var& z2, double tau);

enum class PretrainMethod { GraphCL, SimGRACE };

struct PretrainConfig {
    PretrainMethod method = PretrainMethod::GraphCL;
    GinArch arch;
    double tau = 0.2;
    std::size_t batch_size = 128;
    std::size_t epochs = 20;
    double lr = 0.01;
    double eta = 1.0;
    Augmentation aug1{Augmentation::Kind::NodeDrop, 0.1};
    Augmentation aug2{Augmentation::Kind::NodeDrop, 0.1};
    std::uint64_t seed = 0;
};

struct PretrainResult {
    EncoderCheckpoint checkpoint;
    std::vector<double> epoch_losses;
};

// Contrastive pre-training; writes "epoch,loss" lines to log when given.
PretrainResult pretrain(const GraphDataset& ds, const PretrainConfig& cfg, std::ostream* log = nullptr);

// Checkpoint of a randomly initialised, untrained encoder.
EncoderCheckpoint random_encoder(const GinArch& arch, std::uint64_t seed);

}  // namespace dgp

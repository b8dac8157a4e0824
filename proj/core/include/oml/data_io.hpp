#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "oml/types.hpp"

namespace oml {

/// Parses the sparse multi-label line format:
///
///   #dims p q                      (optional, first line only)
///   L1,L2,...,Lk idx1:val1 idx2:val2 ...
///
/// Label ids are 0-based integers, feature indices 1-based, values real.
/// A line whose label field is empty starts with a space. Lines that are
/// completely empty and lines starting with '#' (after the header) are
/// skipped. Without a header, p and q are the maxima observed.
StreamDataset parse_sparse_multilabel(std::istream& in);

/// Writes a dataset in the sparse format with a "#dims p q" header.
/// Feature values use shortest round-trip formatting, so
/// parse(write(parse(text))) reproduces the dataset exactly.
void write_sparse_multilabel(std::ostream& out, const StreamDataset& ds);

/// Parses a dense CSV with a header row; the last q columns are binary
/// labels, the rest real features.
StreamDataset parse_dense_csv(std::istream& in, Eigen::Index q);

/// Writes a dense CSV with header "f1,...,fp,l1,...,lq".
void write_dense_csv(std::ostream& out, const StreamDataset& ds);

/// Splits into a seed set of round(fraction*n) examples and the remaining
/// stream. With shuffle the order is a seed-determined permutation,
/// otherwise file order. Both parts must be non-empty.
std::pair<std::vector<Example>, std::vector<Example>> split_seed(
    const StreamDataset& ds, double fraction, std::uint64_t rng_seed, bool shuffle = true);

/// Draws a label-correlated stream: latent z per example, features
/// B*z + noise, label j set when w_j . z exceeds the threshold. B and
/// {w_j} are drawn once per seed, so labels share latent structure.
StreamDataset generate_synthetic(const SynthConfig& cfg);

}  // namespace oml

#pragma once

#include <iosfwd>

#include "oml/evaluation.hpp"
#include "oml/online.hpp"

namespace oml {

/// Everything needed to resume or inspect a run.
struct Snapshot {
  Method method = Method::oml;
  Hyperparams hp;
  ModelState state;
};

/// Writes the versioned textual snapshot: dimensions, hyperparameters,
/// round counter, P, V, and the neighbor store. Matrix entries use
/// shortest round-trip formatting; cached projections are recomputed on
/// load, so the container stays compact and byte-stable.
void save_snapshot(std::ostream& out, const Snapshot& snap);

Snapshot load_snapshot(std::istream& in);

}  // namespace oml

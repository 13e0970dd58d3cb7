#pragma once

// Finite base sets carrying a coordinate Hilbert space per point, finitely
// supported sections, and the block layout that stacks a section restricted
// to one part of a partition into a single coordinate vector.

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgl/error.hpp"
#include "kgl/numlin.hpp"

namespace kgl {

using PointId = std::size_t;

class HilbertBundle {
 public:
  HilbertBundle() = default;
  HilbertBundle(std::vector<std::string> points, std::vector<std::size_t> dims)
      : points_(std::move(points)), dims_(std::move(dims)) {
    if (points_.size() != dims_.size()) throw Error(ErrorCode::DimMismatch, "one dimension per point required");
    for (PointId i = 0; i < points_.size(); ++i) {
      if (dims_[i] == 0) throw Error(ErrorCode::DimMismatch, "point '" + points_[i] + "' has dimension 0");
      if (!index_.emplace(points_[i], i).second)
        throw Error(ErrorCode::CrossRefError, "duplicate point label '" + points_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<std::string>& points() const noexcept { return points_; }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t dim(PointId x) const { return dims_.at(x); }
  const std::string& label(PointId x) const { return points_.at(x); }

  PointId id(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw Error(ErrorCode::UnknownPoint, "'" + label + "'");
    return it->second;
  }

  bool contains(const std::string& label) const { return index_.count(label) != 0; }

  friend bool operator==(const HilbertBundle& a, const HilbertBundle& b) {
    return a.points_ == b.points_ && a.dims_ == b.dims_;
  }

 private:
  std::vector<std::string> points_;
  std::vector<std::size_t> dims_;
  std::unordered_map<std::string, PointId> index_;
};

/// Finitely supported section of X*H. Points outside the support are zero.
/// Holds a non-owning pointer to its bundle, which must outlive it.
class Section {
 public:
  explicit Section(const HilbertBundle& bundle) : bundle_(&bundle) {}

  const HilbertBundle& bundle() const noexcept { return *bundle_; }
  const std::map<PointId, CVector>& support() const noexcept { return support_; }

  /// Zero vectors are dropped so that the stored support is the true support.
  void set(PointId x, CVector h) {
    if (x >= bundle_->size()) throw Error(ErrorCode::UnknownPoint, "point id " + std::to_string(x));
    if (h.size() != bundle_->dim(x))
      throw Error(ErrorCode::DimMismatch, "vector of length " + std::to_string(h.size()) + " at point '" +
                                              bundle_->label(x) + "' of dimension " +
                                              std::to_string(bundle_->dim(x)));
    const bool zero = std::all_of(h.begin(), h.end(), [](const cplx& z) { return z == cplx{}; });
    if (zero) {
      support_.erase(x);
    } else {
      support_[x] = std::move(h);
    }
  }

  CVector at(PointId x) const {
    auto it = support_.find(x);
    return it == support_.end() ? CVector(bundle_->dim(x)) : it->second;
  }

  Section& operator+=(const Section& o) {
    if (o.bundle_ != bundle_) throw Error(ErrorCode::BundleMismatch, "adding sections of different bundles");
    for (const auto& [x, h] : o.support_) {
      CVector sum = at(x);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h[i];
      set(x, std::move(sum));
    }
    return *this;
  }

  friend bool operator==(const Section& a, const Section& b) {
    return a.bundle_ == b.bundle_ && a.support_ == b.support_;
  }

 private:
  const HilbertBundle* bundle_;
  std::map<PointId, CVector> support_;
};

inline Section delta_section(const HilbertBundle& bundle, PointId x, CVector h) {
  Section s(bundle);
  s.set(x, std::move(h));
  return s;
}

inline Section delta_section(const HilbertBundle& bundle, const std::string& x, CVector h) {
  return delta_section(bundle, bundle.id(x), std::move(h));
}

/// <f, g>_0 = sum_x <f(x), g(x)>, conjugate-linear in g.
inline cplx inner0(const Section& f, const Section& g) {
  if (&f.bundle() != &g.bundle()) throw Error(ErrorCode::BundleMismatch, "inner0 across bundles");
  cplx sum{};
  for (const auto& [x, h] : f.support()) {
    auto it = g.support().find(x);
    if (it == g.support().end()) continue;
    for (std::size_t i = 0; i < h.size(); ++i) sum += h[i] * std::conj(it->second[i]);
  }
  return sum;
}

/// Coordinate layout of one block X_s: the points in global order, each
/// owning a contiguous run of `dim` coordinates.
class PartIndex {
 public:
  PartIndex() = default;
  PartIndex(const HilbertBundle& bundle, std::vector<PointId> part) : points_(std::move(part)) {
    std::sort(points_.begin(), points_.end());
    offsets_.reserve(points_.size());
    for (PointId x : points_) {
      if (x >= bundle.size()) throw Error(ErrorCode::UnknownPoint, "point id " + std::to_string(x));
      if (!position_.emplace(x, offsets_.size()).second)
        throw Error(ErrorCode::CrossRefError, "duplicate point in part");
      offsets_.push_back(total_dim_);
      dims_.push_back(bundle.dim(x));
      total_dim_ += bundle.dim(x);
    }
  }

  const std::vector<PointId>& points() const noexcept { return points_; }
  std::size_t total_dim() const noexcept { return total_dim_; }
  bool contains(PointId x) const { return position_.count(x) != 0; }

  std::size_t offset(PointId x) const { return offsets_.at(position(x)); }
  std::size_t dim(PointId x) const { return dims_.at(position(x)); }

 private:
  std::size_t position(PointId x) const {
    auto it = position_.find(x);
    if (it == position_.end()) throw Error(ErrorCode::SupportOutsidePart, "point id " + std::to_string(x));
    return it->second;
  }

  std::vector<PointId> points_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> dims_;
  std::unordered_map<PointId, std::size_t> position_;
  std::size_t total_dim_ = 0;
};

inline CVector stack(const Section& f, const PartIndex& idx) {
  CVector v(idx.total_dim());
  for (const auto& [x, h] : f.support()) {
    if (!idx.contains(x))
      throw Error(ErrorCode::SupportOutsidePart, "point '" + f.bundle().label(x) + "' is outside the part");
    std::copy(h.begin(), h.end(), v.begin() + static_cast<std::ptrdiff_t>(idx.offset(x)));
  }
  return v;
}

inline Section unstack(const CVector& v, const PartIndex& idx, const HilbertBundle& bundle) {
  if (v.size() != idx.total_dim())
    throw Error(ErrorCode::DimMismatch, "vector length " + std::to_string(v.size()) + " vs part dimension " +
                                            std::to_string(idx.total_dim()));
  Section s(bundle);
  for (PointId x : idx.points()) {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(idx.offset(x));
    s.set(x, CVector(first, first + static_cast<std::ptrdiff_t>(idx.dim(x))));
  }
  return s;
}

}  // namespace kgl

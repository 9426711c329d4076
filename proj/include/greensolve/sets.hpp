#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace greensolve {

/// Closed interval [lo, hi]; either end may be infinite.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    double distance(double x) const {
        if (x < lo) return lo - x;
        if (x > hi) return x - hi;
        return 0.0;
    }
    friend bool operator==(const Interval&, const Interval&) = default;
};

inline double distance(const Interval& a, const Interval& b) {
    if (a.hi < b.lo) return b.lo - a.hi;
    if (b.hi < a.lo) return a.lo - b.hi;
    return 0.0;
}

/// Closed subset of the line made of finitely many points and closed
/// intervals, kept canonical: intervals sorted and disjoint, points sorted,
/// unique and outside every interval.
class SpectrumSet {
public:
    SpectrumSet() = default;
    SpectrumSet(std::vector<double> points, std::vector<Interval> intervals) {
        for (double p : points) add_point(p);
        for (const auto& iv : intervals) add_interval(iv);
    }

    static SpectrumSet whole_line() {
        const double inf = std::numeric_limits<double>::infinity();
        return SpectrumSet({}, {{-inf, inf}});
    }
    static SpectrumSet from_points(std::vector<double> points) { return SpectrumSet(std::move(points), {}); }

    void add_point(double p) {
        for (const auto& iv : intervals_)
            if (iv.contains(p)) return;
        auto it = std::lower_bound(points_.begin(), points_.end(), p);
        if (it != points_.end() && *it == p) return;
        points_.insert(it, p);
    }

    void add_interval(Interval iv) {
        if (iv.lo > iv.hi) std::swap(iv.lo, iv.hi);
        std::vector<Interval> merged;
        for (const auto& cur : intervals_) {
            if (cur.hi < iv.lo || cur.lo > iv.hi) {
                merged.push_back(cur);
            } else {
                iv.lo = std::min(iv.lo, cur.lo);
                iv.hi = std::max(iv.hi, cur.hi);
            }
        }
        merged.push_back(iv);
        std::sort(merged.begin(), merged.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        intervals_ = std::move(merged);
        std::erase_if(points_, [&](double p) { return iv.contains(p); });
    }

    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<Interval>& intervals() const noexcept { return intervals_; }
    bool empty() const noexcept { return points_.empty() && intervals_.empty(); }

    /// Points as degenerate intervals, merged with the intervals, sorted.
    std::vector<Interval> as_intervals() const {
        std::vector<Interval> all = intervals_;
        for (double p : points_) all.push_back({p, p});
        std::sort(all.begin(), all.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        return all;
    }

    double distance(double x) const {
        double d = std::numeric_limits<double>::infinity();
        for (double p : points_) d = std::min(d, std::abs(p - x));
        for (const auto& iv : intervals_) d = std::min(d, iv.distance(x));
        return d;
    }

    double distance(const Interval& other) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& iv : as_intervals()) d = std::min(d, greensolve::distance(iv, other));
        return d;
    }

    double distance(const SpectrumSet& other) const {
        double d = std::numeric_limits<double>::infinity();
        for (const auto& iv : other.as_intervals()) d = std::min(d, distance(iv));
        return d;
    }

    bool contains(double x, double tol = 0.0) const { return distance(x) <= tol; }

    /// Every point and interval of `other` lies within `tol` of this set.
    bool includes(const SpectrumSet& other, double tol = 0.0) const {
        for (double p : other.points())
            if (!contains(p, tol)) return false;
        for (const auto& iv : other.intervals()) {
            bool covered = false;
            for (const auto& mine : intervals_)
                if (mine.lo - tol <= iv.lo && iv.hi <= mine.hi + tol) covered = true;
            if (!covered) return false;
        }
        return true;
    }

    friend bool operator==(const SpectrumSet&, const SpectrumSet&) = default;

private:
    std::vector<double> points_;
    std::vector<Interval> intervals_;
};

} // namespace greensolve

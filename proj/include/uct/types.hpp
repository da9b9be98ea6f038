#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace uct {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecRef = Eigen::Ref<const Eigen::VectorXd>;

// Error hierarchy. Every failure mode surfaced by the library derives from
// Error so callers can catch one type at the CLI boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define UCT_DEFINE_ERROR(Name)                                  \
    class Name : public Error {                                 \
    public:                                                     \
        explicit Name(const std::string& msg) : Error(msg) {}   \
    }

UCT_DEFINE_ERROR(FormatError);
UCT_DEFINE_ERROR(EmptyRecordError);
UCT_DEFINE_ERROR(ParseError);
UCT_DEFINE_ERROR(IoError);
UCT_DEFINE_ERROR(RejectedValueError);
UCT_DEFINE_ERROR(TooShortError);
UCT_DEFINE_ERROR(SegmentationError);
UCT_DEFINE_ERROR(NoPeakError);
UCT_DEFINE_ERROR(AllNoiseError);
UCT_DEFINE_ERROR(WindowError);
UCT_DEFINE_ERROR(BandError);
UCT_DEFINE_ERROR(DegenerateLabelsError);
UCT_DEFINE_ERROR(StratificationError);
UCT_DEFINE_ERROR(GeometryError);
UCT_DEFINE_ERROR(DuplicateEntryError);
UCT_DEFINE_ERROR(EmptyDataError);
UCT_DEFINE_ERROR(ShapeError);
UCT_DEFINE_ERROR(EmptyError);
UCT_DEFINE_ERROR(LayoutError);
UCT_DEFINE_ERROR(ConfigError);

#undef UCT_DEFINE_ERROR

}  // namespace uct

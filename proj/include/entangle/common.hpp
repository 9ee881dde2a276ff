#ifndef ENTANGLE_COMMON_HPP
#define ENTANGLE_COMMON_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace entangle {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;
using ArrayXd = Array<double>;

inline constexpr const char* kVersion = "0.1.0";

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define ENTANGLE_DEFINE_ERROR(Name)                      \
    class Name : public Error {                          \
    public:                                              \
        using Error::Error;                              \
    }

ENTANGLE_DEFINE_ERROR(SchemaError);
ENTANGLE_DEFINE_ERROR(DuplicateRecord);
ENTANGLE_DEFINE_ERROR(IncompleteGrid);
ENTANGLE_DEFINE_ERROR(InconsistentTask);
ENTANGLE_DEFINE_ERROR(DimensionMismatch);
ENTANGLE_DEFINE_ERROR(EmptyInput);
ENTANGLE_DEFINE_ERROR(EmptyProfile);
ENTANGLE_DEFINE_ERROR(ConstantInput);
ENTANGLE_DEFINE_ERROR(InsufficientPairs);
ENTANGLE_DEFINE_ERROR(PairSetMismatch);
ENTANGLE_DEFINE_ERROR(SingletonPool);
ENTANGLE_DEFINE_ERROR(MissingVerdict);
ENTANGLE_DEFINE_ERROR(EmptyPool);
ENTANGLE_DEFINE_ERROR(InvalidConfig);
ENTANGLE_DEFINE_ERROR(InvalidArgument);

#undef ENTANGLE_DEFINE_ERROR

/// Malformed input line. `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace entangle

#endif // ENTANGLE_COMMON_HPP

#pragma once

#include <stdexcept>
#include <string>

namespace pgr {

// Error categories map onto CLI exit codes: usage=1, data=2, numeric=3.
enum class ErrorKind { usage, data, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define PGR_DEFINE_ERROR(Name, Kind)                                              \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& msg) : Error(ErrorKind::Kind, msg) {}    \
    }

// scene_graph
PGR_DEFINE_ERROR(SchemaError, data);
PGR_DEFINE_ERROR(IntegrityError, data);

// description parsing / service client
PGR_DEFINE_ERROR(GrammarError, data);
PGR_DEFINE_ERROR(UnknownRelation, data);
PGR_DEFINE_ERROR(MissingPlaceholder, data);
PGR_DEFINE_ERROR(NetworkError, data);
PGR_DEFINE_ERROR(CacheMiss, data);
PGR_DEFINE_ERROR(AuthError, data);

// merge / features
PGR_DEFINE_ERROR(EmptyInput, data);
PGR_DEFINE_ERROR(MissingEmbedding, data);

// encoder / trainer
PGR_DEFINE_ERROR(DimensionMismatch, numeric);
PGR_DEFINE_ERROR(StaleCache, numeric);
PGR_DEFINE_ERROR(NormViolation, numeric);
PGR_DEFINE_ERROR(NonFiniteLoss, numeric);
PGR_DEFINE_ERROR(EmptyDataset, data);

// retrieval / eval
PGR_DEFINE_ERROR(RangeError, numeric);
PGR_DEFINE_ERROR(UntrainedRegressor, data);
PGR_DEFINE_ERROR(EmptyIndex, data);
PGR_DEFINE_ERROR(MissingCoordinates, data);

#undef PGR_DEFINE_ERROR

}  // namespace pgr

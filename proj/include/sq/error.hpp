#pragma once

#include <stdexcept>
#include <string>

namespace sq {

/// Base of every error raised by the library. `kind()` is the stable name
/// used by the CLI and the HTTP layer when reporting failures.
class error : public std::runtime_error {
  public:
    error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), m_kind(std::move(kind))
    {}

    const std::string& kind() const noexcept { return m_kind; }

  private:
    std::string m_kind;
};

#define SQ_DEFINE_ERROR(Name)                                              \
    class Name : public error {                                            \
      public:                                                              \
        explicit Name(const std::string& what) : error(#Name, what) {}     \
    }

// corpus
SQ_DEFINE_ERROR(SchemaError);
SQ_DEFINE_ERROR(InvariantError);
SQ_DEFINE_ERROR(EmptyCorpus);
SQ_DEFINE_ERROR(DuplicateRecordId);

// construction pipeline
SQ_DEFINE_ERROR(UnsortedStream);
SQ_DEFINE_ERROR(BoundaryError);

// annotator
SQ_DEFINE_ERROR(UnbalancedQuotes);
SQ_DEFINE_ERROR(SpanNotFound);
SQ_DEFINE_ERROR(MissingPrediction);

// indexes
SQ_DEFINE_ERROR(DuplicateDocId);
SQ_DEFINE_ERROR(EmptyQuery);
SQ_DEFINE_ERROR(BadMagic);
SQ_DEFINE_ERROR(DimMismatch);
SQ_DEFINE_ERROR(TruncatedFile);
SQ_DEFINE_ERROR(NormalizationError);
SQ_DEFINE_ERROR(EmptyStore);
SQ_DEFINE_ERROR(ParameterError);
SQ_DEFINE_ERROR(UnknownExpert);
SQ_DEFINE_ERROR(IoError);

// recommender / evaluation
SQ_DEFINE_ERROR(UnknownDocId);
SQ_DEFINE_ERROR(IndexMissing);
SQ_DEFINE_ERROR(EmptyField);
SQ_DEFINE_ERROR(UnknownQuery);
SQ_DEFINE_ERROR(MissingClusterModel);
SQ_DEFINE_ERROR(TooFewSources);

#undef SQ_DEFINE_ERROR

}  // namespace sq

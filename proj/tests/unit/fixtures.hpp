#pragma once

#include <string>
#include <vector>

#include "sq/corpus.hpp"

namespace sq::test {

inline std::string data_path(const std::string& name) { return std::string(SQ_TEST_DATA_DIR) + "/" + name; }

/// A valid record whose main sentence is "<source> said <quote>."
inline QuoteRecord make_record(const std::string& id, const std::string& source, const std::string& entity,
                               const std::string& quote, const std::string& published_at = "2020-03-01T12:00:00Z")
{
    QuoteRecord r;
    r.record_id = id;
    r.main_sentence = source + " said " + quote + ".";
    r.quote = quote;
    r.source_surface = source;
    r.source_entity = entity;
    r.ontology_classes = {"Person"};
    r.keywords = {"alpha", "beta"};
    r.title = "Title of " + id;
    r.summary_first_sentence = "Summary of " + id + ".";
    r.categories = {"IAB1"};
    r.news_source = "wire";
    r.published_at = published_at;
    r.published = *parse_timestamp(published_at);
    return r;
}

}  // namespace sq::test

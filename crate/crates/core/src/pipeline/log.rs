use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::PipelineError;
use crate::auction::{AuctionParams, BidderEntry, BidderId, Money, RankScore, Score};
use crate::market::{ListingHistory, PeriodRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetitorRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub score: f64,
    pub bid: f64,
    pub quality: f64,
}

fn one() -> f64 {
    1.0
}

/// One auction draw seen by one listing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuctionLogRecord {
    pub period: u64,
    pub listing_id: String,
    #[serde(default)]
    pub own_id: u64,
    pub own_bid: f64,
    #[serde(default = "one")]
    pub own_score: f64,
    #[serde(default = "one")]
    pub own_quality: f64,
    pub competitors: Vec<CompetitorRecord>,
    pub rank_reserve: f64,
    pub mainline_reserve: f64,
    pub mainline_cap: usize,
    /// Defaults to `min(mainline_cap, positions)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mainline_slots: Option<usize>,
    pub position_curve: Vec<f64>,
}

/// Optional declaration of a listing. Once any listing is declared, auctions
/// may only reference declared listings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListingHeader {
    pub listing_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<f64>,
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    #[serde(rename = "type")]
    kind: &'static str,
    #[serde(flatten)]
    inner: &'a T,
}

fn field_err(line: usize, field: impl Into<String>, message: impl ToString) -> PipelineError {
    PipelineError::Field {
        line,
        field: field.into(),
        message: message.to_string(),
    }
}

impl AuctionLogRecord {
    /// Auction parameters with entries ordered by bidder id, the listing's id and its bid.
    pub fn to_params(&self, line: usize) -> Result<(AuctionParams, BidderId, Money), PipelineError> {
        let money = |field: String, x: f64| Money::new(x).map_err(|e| field_err(line, field, e));
        let score = |field: String, x: f64| Score::new(x).map_err(|e| field_err(line, field, e));
        let reserve = |field: &str, x: f64| RankScore::new(x).map_err(|e| field_err(line, field, e));

        let own_id = BidderId(self.own_id);
        let own_bid = money("own_bid".into(), self.own_bid)?;
        let mut entries = vec![BidderEntry {
            id: own_id,
            score: score("own_score".into(), self.own_score)?,
            quality: self.own_quality,
            bid: own_bid,
        }];
        for (k, c) in self.competitors.iter().enumerate() {
            entries.push(BidderEntry {
                id: BidderId(c.id.unwrap_or(self.own_id + 1 + k as u64)),
                score: score(format!("competitors[{k}].score"), c.score)?,
                quality: c.quality,
                bid: money(format!("competitors[{k}].bid"), c.bid)?,
            });
        }
        entries.sort_by_key(|e| e.id);
        let params = AuctionParams {
            entries,
            rank_reserve: reserve("rank_reserve", self.rank_reserve)?,
            mainline_reserve: reserve("mainline_reserve", self.mainline_reserve)?,
            mainline_cap: self.mainline_cap,
            position_curve: self.position_curve.clone(),
            mainline_slots: self
                .mainline_slots
                .unwrap_or(self.mainline_cap.min(self.position_curve.len())),
        };
        params.validate().map_err(|e| PipelineError::Parse {
            line,
            message: e.to_string(),
        })?;
        Ok((params, own_id, own_bid))
    }

    fn from_params(listing_id: &str, period: u64, params: &AuctionParams, own: BidderId) -> Option<Self> {
        let me = params.entry(own)?;
        Some(AuctionLogRecord {
            period,
            listing_id: listing_id.to_string(),
            own_id: own.0,
            own_bid: me.bid.as_f64(),
            own_score: me.score.as_f64(),
            own_quality: me.quality,
            competitors: params
                .entries
                .iter()
                .filter(|e| e.id != own)
                .map(|e| CompetitorRecord {
                    id: Some(e.id.0),
                    score: e.score.as_f64(),
                    bid: e.bid.as_f64(),
                    quality: e.quality,
                })
                .collect(),
            rank_reserve: params.rank_reserve.as_f64(),
            mainline_reserve: params.mainline_reserve.as_f64(),
            mainline_cap: params.mainline_cap,
            mainline_slots: Some(params.mainline_slots),
            position_curve: params.position_curve.clone(),
        })
    }
}

/// Writes histories as JSONL: a listing line, then one line per auction draw.
pub fn write_log<W: Write>(mut out: W, histories: &[ListingHistory]) -> Result<(), PipelineError> {
    let io = |e| PipelineError::io("<log>", e);
    for h in histories {
        let header = ListingHeader {
            listing_id: h.listing_id.clone(),
            truth: h.truth,
        };
        serde_json::to_writer(&mut out, &Tagged { kind: "listing", inner: &header })?;
        out.write_all(b"\n").map_err(io)?;
        for p in &h.periods {
            for params in &p.auction_sample {
                let record = AuctionLogRecord::from_params(&h.listing_id, p.period_index, params, h.bidder_id)
                    .ok_or(crate::market::MarketError::MissingPlayer {
                        listing: h.listing_id.clone(),
                        period: p.period_index,
                    })?;
                serde_json::to_writer(&mut out, &Tagged { kind: "auction", inner: &record })?;
                out.write_all(b"\n").map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

struct Builder {
    history: ListingHistory,
    declared_at: Option<usize>,
    last_raw_period: Option<(u64, Money)>,
}

enum Line {
    Listing(ListingHeader),
    Auction(AuctionLogRecord),
}

fn parse_line(text: &str, line: usize) -> Result<Line, PipelineError> {
    let parse_err = |e: serde_json::Error| PipelineError::Parse {
        line,
        message: e.to_string(),
    };
    let mut value: Value = serde_json::from_str(text).map_err(parse_err)?;
    let kind = match value.as_object_mut() {
        Some(map) => map.remove("type"),
        None => {
            return Err(PipelineError::Parse {
                line,
                message: "expected a JSON object".into(),
            })
        }
    };
    match kind.as_ref().map(|k| k.as_str()) {
        Some(Some("listing")) => Ok(Line::Listing(serde_json::from_value(value).map_err(parse_err)?)),
        None | Some(Some("auction")) => Ok(Line::Auction(serde_json::from_value(value).map_err(parse_err)?)),
        _ => Err(field_err(line, "type", "expected \"listing\" or \"auction\"")),
    }
}

/// Groups auction lines into listing histories, in order of first appearance.
///
/// Raw periods must not decrease within a listing, and the listing's bid must
/// not change inside a raw period. With `batch_window = Some(w)`, raw period
/// `p` is pooled into period `p / w`.
pub fn read_histories<R: BufRead>(reader: R, batch_window: Option<u64>) -> Result<Vec<ListingHistory>, PipelineError> {
    if batch_window == Some(0) {
        return Err(PipelineError::Config("batch_window must be positive".into()));
    }
    let mut builders: Vec<Builder> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut any_declared = false;

    for (i, text) in reader.lines().enumerate() {
        let line = i + 1;
        let text = text.map_err(|e| PipelineError::io("<log>", e))?;
        if text.trim().is_empty() {
            continue;
        }
        match parse_line(&text, line)? {
            Line::Listing(header) => {
                if let Some(t) = header.truth {
                    if !(t.is_finite() && t >= 0.0) {
                        return Err(field_err(line, "truth", "must be finite and non-negative"));
                    }
                }
                if index.contains_key(&header.listing_id) {
                    return Err(field_err(line, "listing_id", format!("listing {} declared after use or twice", header.listing_id)));
                }
                any_declared = true;
                index.insert(header.listing_id.clone(), builders.len());
                builders.push(Builder {
                    history: ListingHistory {
                        listing_id: header.listing_id,
                        bidder_id: BidderId(0),
                        periods: Vec::new(),
                        truth: header.truth,
                    },
                    declared_at: Some(line),
                    last_raw_period: None,
                });
            }
            Line::Auction(record) => {
                let (params, own_id, own_bid) = record.to_params(line)?;
                let slot = match index.get(&record.listing_id) {
                    Some(&k) => k,
                    None if any_declared => {
                        return Err(field_err(line, "listing_id", format!("unknown listing {}", record.listing_id)));
                    }
                    None => {
                        index.insert(record.listing_id.clone(), builders.len());
                        builders.push(Builder {
                            history: ListingHistory {
                                listing_id: record.listing_id.clone(),
                                bidder_id: own_id,
                                periods: Vec::new(),
                                truth: None,
                            },
                            declared_at: None,
                            last_raw_period: None,
                        });
                        builders.len() - 1
                    }
                };
                let b = &mut builders[slot];
                if b.history.periods.is_empty() {
                    b.history.bidder_id = own_id;
                } else if b.history.bidder_id != own_id {
                    return Err(field_err(line, "own_id", "differs from earlier auctions of this listing"));
                }
                match b.last_raw_period {
                    Some((p, _)) if record.period < p => {
                        return Err(field_err(line, "period", format!("{} after {} for listing {}", record.period, p, record.listing_id)));
                    }
                    Some((p, bid)) if record.period == p && bid != own_bid => {
                        return Err(field_err(line, "own_bid", "changes within a period"));
                    }
                    _ => {}
                }
                b.last_raw_period = Some((record.period, own_bid));
                let period_index = batch_window.map_or(record.period, |w| record.period / w);
                match b.history.periods.last_mut() {
                    Some(last) if last.period_index == period_index => last.auction_sample.push(params),
                    _ => b.history.periods.push(PeriodRecord {
                        period_index,
                        own_bid,
                        auction_sample: vec![params],
                        weight: 1.0,
                    }),
                }
            }
        }
    }
    builders
        .into_iter()
        .map(|b| match (b.history.periods.is_empty(), b.declared_at) {
            (true, Some(line)) => Err(PipelineError::Parse {
                line,
                message: format!("listing {} has no auctions", b.history.listing_id),
            }),
            _ => Ok(b.history),
        })
        .collect()
}

pub fn ingest(path: &Path, format: &str, batch_window: Option<u64>) -> Result<Vec<ListingHistory>, PipelineError> {
    if format != "jsonl" {
        return Err(PipelineError::Format(format.to_string()));
    }
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    read_histories(BufReader::new(file), batch_window)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RECORD: &str = r#"{"period":0,"listing_id":"a","own_bid":0.5,"competitors":[{"score":1.0,"bid":0.4,"quality":1.0}],"rank_reserve":0.1,"mainline_reserve":0.2,"mainline_cap":1,"position_curve":[1.0,0.5]}"#;

    fn read(text: &str) -> Result<Vec<ListingHistory>, PipelineError> {
        read_histories(text.as_bytes(), None)
    }

    #[test]
    fn empty_input_is_empty() {
        assert!(read("").unwrap().is_empty());
    }

    #[test]
    fn groups_draws_into_periods() {
        let second = RECORD.replace("\"period\":0", "\"period\":1");
        let text = format!("{RECORD}\n{RECORD}\n{second}\n");
        let h = read(&text).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].periods.len(), 2);
        assert_eq!(h[0].periods[0].auction_sample.len(), 2);
        assert_eq!(h[0].periods[0].auction_sample[0].mainline_slots, 1);
        let pooled = read_histories(text.as_bytes(), Some(2)).unwrap();
        assert_eq!(pooled[0].periods.len(), 1);
        assert_eq!(pooled[0].periods[0].auction_sample.len(), 3);
    }

    #[test]
    fn negative_bid_names_the_field() {
        let bad = RECORD.replace("\"bid\":0.4", "\"bid\":-0.4");
        match read(&bad) {
            Err(PipelineError::Field { line, field, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(field, "competitors[0].bid");
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = RECORD.replace("\"own_bid\":0.5", "\"own_bid\":-1");
        assert!(matches!(read(&bad), Err(PipelineError::Field { field, .. }) if field == "own_bid"));
    }

    #[test]
    fn missing_field_and_order_errors_carry_lines() {
        let missing = RECORD.replace("\"own_bid\":0.5,", "");
        let err = read(&format!("{RECORD}\n{missing}")).unwrap_err();
        assert!(matches!(&err, PipelineError::Parse { line: 2, message } if message.contains("own_bid")));

        let later = RECORD.replace("\"period\":0", "\"period\":3");
        let err = read(&format!("{later}\n{RECORD}")).unwrap_err();
        assert!(matches!(err, PipelineError::Field { line: 2, ref field, .. } if field == "period"));
    }

    #[test]
    fn undeclared_listing_is_rejected_once_headers_exist() {
        let header = r#"{"type":"listing","listing_id":"b","truth":0.7}"#;
        let err = read(&format!("{header}\n{RECORD}")).unwrap_err();
        assert!(matches!(err, PipelineError::Field { line: 2, ref field, .. } if field == "listing_id"));
        let ok = read(&format!("{header}\n{}", RECORD.replace("\"a\"", "\"b\""))).unwrap();
        assert_eq!(ok[0].truth, Some(0.7));
    }

    #[test]
    fn unknown_format_is_rejected() {
        assert!(matches!(ingest(Path::new("x"), "csv", None), Err(PipelineError::Format(_))));
    }
}

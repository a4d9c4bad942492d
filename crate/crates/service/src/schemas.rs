//! JSON Schemas (draft 2020-12) for every HTTP response body.

pub const EPISODE: &str = include_str!("../schemas/episode.schema.json");
pub const EPISODE_PAGE: &str = include_str!("../schemas/episode_page.schema.json");
pub const CHANNEL_LIST: &str = include_str!("../schemas/channel_list.schema.json");
pub const ERROR: &str = include_str!("../schemas/error.schema.json");

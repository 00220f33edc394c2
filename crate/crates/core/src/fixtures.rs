//! Small datasets shared by unit tests.

use crate::data::{parse_matches, Dataset};

/// Three teams, two matches, one deuce set in each.
pub(crate) fn tiny() -> Dataset {
    let csv = "game_id,round,home,away,set_index,home_points,away_points\n\
        1,1,Aurora Verona,Brenta Padova,1,25,20\n\
        1,1,Aurora Verona,Brenta Padova,2,24,26\n\
        1,1,Aurora Verona,Brenta Padova,3,25,23\n\
        1,1,Aurora Verona,Brenta Padova,4,25,18\n\
        2,2,Brenta Padova,Colli Trento,1,25,27\n\
        2,2,Brenta Padova,Colli Trento,2,20,25\n\
        2,2,Brenta Padova,Colli Trento,3,19,25\n";
    parse_matches(csv.as_bytes()).unwrap()
}

# Example session: a small house built through the tool server.
calls = [
    ("create_wall_chain", {"points": [[0, 0], [12, 0], [12, 8], [0, 8]],
                           "height": 3.0, "thickness": 0.2, "close": True}),
    ("create_slab", {"outline": [[0, 0], [12, 0], [12, 8], [0, 8]],
                     "thickness": 0.25, "elevation": 0.0}),
    ("create_door", {"position": [6, 0, 0]}),
    ("create_window", {"position": [3, 8, 0], "sill_height": 0.9}),
    ("create_roof_over_walls", {"walls": "$1.guids", "style": "gable",
                                "slope_deg": 35}),
]

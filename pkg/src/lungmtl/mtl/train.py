
TrainConfig = TrainData = cosine_lr = train = None
